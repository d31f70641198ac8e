fn main() {
    std::process::exit(swlab::cli::dispatch(std::env::args_os()));
}
