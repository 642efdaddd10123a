fn main() {
    std::process::exit(garmfit::cli::run(std::env::args_os()));
}
