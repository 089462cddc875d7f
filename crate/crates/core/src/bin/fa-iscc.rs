fn main() {
    std::process::exit(fa_iscc::cli::run(std::env::args_os()));
}
