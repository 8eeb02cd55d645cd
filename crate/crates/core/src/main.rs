fn main() {
    std::process::exit(pointlim::cli::run(std::env::args_os()));
}
