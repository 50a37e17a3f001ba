fn main() {
    std::process::exit(hyperdecay::cli::run(std::env::args_os()));
}
