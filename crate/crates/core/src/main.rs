fn main() {
    std::process::exit(shockform::cli_io::run_cli(std::env::args_os()));
}
