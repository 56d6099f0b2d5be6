fn main() {
    std::process::exit(vfr_kit::cli::run(std::env::args_os()));
}
