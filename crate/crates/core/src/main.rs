fn main() {
    std::process::exit(psatz::cli::run(std::env::args_os()));
}
