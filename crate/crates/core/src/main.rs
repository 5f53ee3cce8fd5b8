fn main() {
    std::process::exit(pharmap::cli::main_with_args(std::env::args_os()));
}
