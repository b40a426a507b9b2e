fn main() {
    std::process::exit(chirpest::cli::main_entry());
}
