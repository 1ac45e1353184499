fn main() {
    std::process::exit(cag::cli::run(std::env::args_os()));
}
