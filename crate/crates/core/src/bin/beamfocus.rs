fn main() {
    std::process::exit(beamfocus::cli::cli_main(std::env::args_os()));
}
