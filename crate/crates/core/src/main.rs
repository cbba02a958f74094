fn main() {
    std::process::exit(sunkcost::cli::main());
}
