fn main() {
    std::process::exit(shearlet_cli::run(std::env::args_os()));
}
