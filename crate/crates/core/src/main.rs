fn main() {
    std::process::exit(permex_core::cli::main());
}
