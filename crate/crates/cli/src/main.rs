fn main() {
    std::process::exit(preq_cli::run_cli(std::env::args_os()));
}
