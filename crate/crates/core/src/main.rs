fn main() {
    std::process::exit(macrosim::cli::main());
}
