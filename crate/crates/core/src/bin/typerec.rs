fn main() {
    std::process::exit(typerec::cli::run(std::env::args_os()));
}
