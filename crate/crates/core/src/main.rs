fn main() {
    std::process::exit(psdcomp::cli::run());
}
