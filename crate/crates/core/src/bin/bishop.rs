fn main() {
    std::process::exit(bishop::cli::run(std::env::args_os()));
}
