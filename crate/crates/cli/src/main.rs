fn main() {
    std::process::exit(pvcap_cli::main_with_args(std::env::args_os()));
}
