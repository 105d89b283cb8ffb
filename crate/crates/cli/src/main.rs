fn main() {
    std::process::exit(pitman_cli::run(std::env::args_os()));
}
