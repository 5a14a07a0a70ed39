fn main() {
    std::process::exit(pastvar::cli::run(std::env::args_os()));
}
