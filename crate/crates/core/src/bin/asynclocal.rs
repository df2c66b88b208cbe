fn main() {
    std::process::exit(asynclocal::cli::main_with_args(std::env::args_os()));
}
