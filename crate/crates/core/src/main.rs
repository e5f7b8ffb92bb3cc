fn main() {
    std::process::exit(funktomo::cli::main_with_args(std::env::args_os()));
}
