fn main() {
    std::process::exit(thetakit::cli::run(std::env::args_os()));
}
