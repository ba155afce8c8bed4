fn main() {
    std::process::exit(kypher_cli::run(std::env::args_os()));
}
