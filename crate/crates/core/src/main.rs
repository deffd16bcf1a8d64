fn main() {
    std::process::exit(tileweave::cli::run(std::env::args_os()));
}
