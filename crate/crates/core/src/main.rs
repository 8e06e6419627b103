fn main() {
    std::process::exit(qcbkit::cli::main_with(std::env::args_os()));
}
