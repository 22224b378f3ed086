fn main() {
    std::process::exit(satforge::cli::run(std::env::args_os()));
}
