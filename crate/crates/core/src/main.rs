fn main() {
    std::process::exit(cklh::cli::run());
}
