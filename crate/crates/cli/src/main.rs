fn main() {
    std::process::exit(mirrormodes_cli::run(std::env::args_os()));
}
