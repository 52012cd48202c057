fn main() {
    std::process::exit(platecell::cli::run_command(std::env::args_os()));
}
