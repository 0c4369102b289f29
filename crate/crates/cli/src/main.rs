fn main() {
    std::process::exit(splitci_cli::run());
}
