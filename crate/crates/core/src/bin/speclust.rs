fn main() {
    std::process::exit(speclust::cli::run(std::env::args()));
}
