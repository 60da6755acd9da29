fn main() {
    std::process::exit(fdrlab::cli::run(std::env::args_os()));
}
