fn main() {
    std::process::exit(semichan::cli::run(std::env::args_os()));
}
