fn main() {
    std::process::exit(definetti_cli::run(std::env::args_os()));
}
