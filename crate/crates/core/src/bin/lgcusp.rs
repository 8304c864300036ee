fn main() {
    std::process::exit(lgcusp::cli::main_with(std::env::args_os()));
}
