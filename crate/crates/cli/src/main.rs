fn main() {
    std::process::exit(tunefree_cli::main_with_args(std::env::args_os()));
}
