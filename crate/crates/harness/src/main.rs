fn main() {
    std::process::exit(cfcolor_harness::cli::main_with_args(std::env::args_os()));
}
