fn main() {
    std::process::exit(pego_lab::cli::run(std::env::args_os()));
}
