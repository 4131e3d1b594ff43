fn main() {
    std::process::exit(qhahn::cli::main_with_args(std::env::args_os()));
}
