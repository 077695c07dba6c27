fn main() {
    std::process::exit(graspkit::cli::run(std::env::args_os()));
}
