fn main() {
    std::process::exit(i32::from(hyperlat::cli::run(std::env::args_os())));
}
