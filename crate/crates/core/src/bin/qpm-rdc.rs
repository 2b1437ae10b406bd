fn main() {
    std::process::exit(qpm_rdc::cli::main_with_args(std::env::args_os()));
}
