fn main() {
    std::process::exit(stmp::cli::run(std::env::args_os()));
}
