fn main() {
    std::process::exit(diractime::cli::run(std::env::args_os()));
}
