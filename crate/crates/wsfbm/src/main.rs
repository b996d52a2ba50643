fn main() {
    std::process::exit(wsfbm::cli::run(std::env::args_os()));
}
