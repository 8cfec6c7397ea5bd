fn main() {
    std::process::exit(trek::cli::run(std::env::args_os()));
}
