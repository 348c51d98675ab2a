fn main() {
    std::process::exit(cosetlab::cli::run(std::env::args_os().collect()));
}
