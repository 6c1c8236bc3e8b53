fn main() {
    std::process::exit(abstain_cli::run_cli(std::env::args_os()));
}
