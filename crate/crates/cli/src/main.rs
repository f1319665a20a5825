fn main() {
    std::process::exit(spcelab_cli::run_cli(std::env::args_os()));
}
