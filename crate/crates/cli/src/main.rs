fn main() {
    std::process::exit(qkdrand_cli::run(std::env::args_os()));
}
