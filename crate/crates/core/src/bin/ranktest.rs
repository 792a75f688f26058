fn main() {
    std::process::exit(ranktest::cli::run(std::env::args_os()));
}
