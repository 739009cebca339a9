fn main() {
    std::process::exit(lrfpp_cli::main_with_args(std::env::args_os()));
}
