fn main() {
    std::process::exit(contraction_cli::run(std::env::args_os()));
}
