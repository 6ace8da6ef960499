fn main() {
    std::process::exit(stagfv::cli::main());
}
