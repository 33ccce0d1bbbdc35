fn main() {
    std::process::exit(superbalance::cli::run(std::env::args_os()));
}
