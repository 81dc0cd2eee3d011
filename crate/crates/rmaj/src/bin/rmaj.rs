fn main() {
    std::process::exit(rmaj::cli::run(std::env::args_os()));
}
