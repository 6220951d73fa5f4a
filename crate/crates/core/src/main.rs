fn main() {
    std::process::exit(capture_lab::cli::main_with(std::env::args_os()));
}
