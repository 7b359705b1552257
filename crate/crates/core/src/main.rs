fn main() {
    std::process::exit(envlab::cli::run(std::env::args_os()));
}
