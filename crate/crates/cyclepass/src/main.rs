fn main() {
    std::process::exit(cyclepass::cli::main());
}
