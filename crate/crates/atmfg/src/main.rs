fn main() {
    std::process::exit(atmfg::cli::run());
}
