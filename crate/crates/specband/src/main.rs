fn main() {
    std::process::exit(specband::cli::main_entry());
}
