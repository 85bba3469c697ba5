fn main() {
    std::process::exit(cautious_routing::cli::main_with_args(std::env::args_os()));
}
