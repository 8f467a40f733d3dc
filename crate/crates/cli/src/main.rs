fn main() {
    std::process::exit(costodds_cli::run(std::env::args_os()));
}
