fn main() {
    std::process::exit(pipir_cli::run(std::env::args_os()));
}
