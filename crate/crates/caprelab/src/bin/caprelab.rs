fn main() {
    std::process::exit(caprelab::cli::main());
}
