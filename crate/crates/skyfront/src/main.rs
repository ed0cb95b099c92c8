fn main() {
    std::process::exit(skyfront::cli::run());
}
