fn main() {
    std::process::exit(eit4::cli::run(std::env::args_os()));
}
