fn main() {
    std::process::exit(pricelab::cli::run(std::env::args_os()));
}
