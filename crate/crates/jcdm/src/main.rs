fn main() {
    std::process::exit(jcdm::cli::run(std::env::args_os()));
}
