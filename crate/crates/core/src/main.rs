fn main() {
    std::process::exit(lgev::cli::run(std::env::args_os()));
}
