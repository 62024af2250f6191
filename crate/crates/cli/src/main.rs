fn main() {
    std::process::exit(halfspace_cli::run_command(std::env::args_os()));
}
