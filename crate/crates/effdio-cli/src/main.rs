fn main() {
    std::process::exit(effdio_cli::run(std::env::args()));
}
