fn main() {
    std::process::exit(shadowlab_cli::run_cli(std::env::args_os()));
}
