fn main() {
    std::process::exit(pkp::cli::run(std::env::args_os()));
}
