fn main() {
    std::process::exit(midib_deid::cli::run(std::env::args_os()));
}
