fn main() {
    std::process::exit(robust_design::cli::dispatch(std::env::args_os()));
}
