fn main() {
    std::process::exit(randomset_core::cli::run(std::env::args_os()));
}
