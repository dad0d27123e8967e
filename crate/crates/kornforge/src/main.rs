fn main() {
    std::process::exit(kornforge::cli::main(std::env::args_os()));
}
