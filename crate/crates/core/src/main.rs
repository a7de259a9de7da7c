fn main() {
    std::process::exit(susy_decoherence::cli::run(std::env::args_os()));
}
