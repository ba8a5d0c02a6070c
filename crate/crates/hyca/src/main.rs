fn main() {
    std::process::exit(hyca::cli::main_with(std::env::args_os()));
}
