fn main() {
    std::process::exit(polaron::cli::run(std::env::args_os()));
}
