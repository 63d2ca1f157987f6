fn main() {
    std::process::exit(sievelab::cli::main_entry());
}
