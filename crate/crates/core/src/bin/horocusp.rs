fn main() {
    std::process::exit(horocusp::cli::main_with_args(std::env::args_os()));
}
