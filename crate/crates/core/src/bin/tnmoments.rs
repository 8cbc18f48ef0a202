fn main() {
    std::process::exit(tnmoments::cli::main_with_args(std::env::args_os()));
}
