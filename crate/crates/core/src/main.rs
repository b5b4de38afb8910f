fn main() {
    std::process::exit(ttc::cli::main_with_args(std::env::args_os()));
}
