fn main() {
    std::process::exit(susplab::cli::run(std::env::args_os()));
}
