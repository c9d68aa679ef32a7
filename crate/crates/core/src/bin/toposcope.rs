fn main() {
    std::process::exit(topos_envelope::cli::run(std::env::args_os()));
}
