fn main() {
    std::process::exit(kturb::cli::main());
}
