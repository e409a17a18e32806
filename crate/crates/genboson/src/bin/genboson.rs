fn main() {
    std::process::exit(genboson::cli::main_from_args(std::env::args()));
}
