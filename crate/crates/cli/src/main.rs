fn main() {
    std::process::exit(hill_cli::main_with_args(std::env::args_os()));
}
