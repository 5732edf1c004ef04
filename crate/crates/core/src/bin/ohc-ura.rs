fn main() {
    std::process::exit(ohc_ura::cli::main_with_args(std::env::args_os()));
}
