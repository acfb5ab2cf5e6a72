fn main() {
    std::process::exit(swd_core::cli::run(std::env::args_os()));
}
