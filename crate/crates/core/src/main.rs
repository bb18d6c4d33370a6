fn main() {
    std::process::exit(shortpulse::cli::main_with_args(std::env::args_os()));
}
