fn main() {
    std::process::exit(harmgap::cli::run(std::env::args_os()));
}
