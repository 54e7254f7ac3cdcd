fn main() {
    std::process::exit(ghiqm::cli::run_from_env());
}
