fn main() {
    std::process::exit(qh_stopping::cli::main_with_args(std::env::args_os()));
}
