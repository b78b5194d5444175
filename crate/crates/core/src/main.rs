fn main() {
    std::process::exit(specres::cli::main_with_args(std::env::args_os()));
}
