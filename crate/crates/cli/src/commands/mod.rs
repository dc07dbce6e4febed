pub mod bounds;
pub mod denoise;
pub mod regress;
pub mod simulate;
