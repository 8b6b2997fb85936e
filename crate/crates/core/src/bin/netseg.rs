fn main() {
    std::process::exit(netseg::cli::main_with(std::env::args_os()));
}
