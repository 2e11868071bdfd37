fn main() {
    std::process::exit(heat_semigroup::cli::run(std::env::args_os()));
}
