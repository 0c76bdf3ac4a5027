fn main() {
    std::process::exit(minitile_splat::cli::run(std::env::args_os()));
}
