fn main() {
    std::process::exit(pconductance::cli::main_with_args(std::env::args_os()));
}
