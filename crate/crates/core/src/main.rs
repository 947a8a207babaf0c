fn main() {
    std::process::exit(soslab::cli::run(std::env::args_os()));
}
