fn main() {
    std::process::exit(foliata::cli::run(std::env::args_os()));
}
