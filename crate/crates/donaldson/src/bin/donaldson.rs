fn main() {
    std::process::exit(donaldson::cli::main_entry(std::env::args_os()));
}
