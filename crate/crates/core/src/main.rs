fn main() {
    std::process::exit(possq::cli::main_with_args(std::env::args_os()));
}
