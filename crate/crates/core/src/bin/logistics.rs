fn main() {
    std::process::exit(entropic_logistics::cli::run(std::env::args_os()));
}
