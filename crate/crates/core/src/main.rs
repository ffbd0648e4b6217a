fn main() {
    std::process::exit(pairclass::cli::main());
}
