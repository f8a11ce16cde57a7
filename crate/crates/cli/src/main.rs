fn main() {
    std::process::exit(knnclust_cli::run_from_env());
}
