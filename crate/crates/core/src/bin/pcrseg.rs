fn main() {
    std::process::exit(pcrseg::cli::run(std::env::args_os()));
}
