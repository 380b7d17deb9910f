fn main() {
    std::process::exit(boostlab_cli::run_from_env());
}
