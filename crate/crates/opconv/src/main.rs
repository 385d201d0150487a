fn main() {
    std::process::exit(opconv::cli::run());
}
