fn main() {
    std::process::exit(mgc_core::cli::run(std::env::args_os()));
}
