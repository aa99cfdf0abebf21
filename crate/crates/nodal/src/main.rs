fn main() {
    std::process::exit(nodal::cli::run(std::env::args_os()));
}
