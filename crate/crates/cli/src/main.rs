fn main() {
    std::process::exit(rydeit_cli::run(std::env::args_os()));
}
