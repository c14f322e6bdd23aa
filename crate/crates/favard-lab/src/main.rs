fn main() {
    std::process::exit(favard_lab::cli::run_cli(std::env::args_os()));
}
