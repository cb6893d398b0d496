fn main() {
    std::process::exit(ivcov_cli::run(std::env::args_os()));
}
