fn main() {
    std::process::exit(kselect::cli::run(std::env::args_os()));
}
