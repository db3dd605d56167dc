fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("TOOL_LOG", "error")).init();
    std::process::exit(ltvobs::cli::run(std::env::args_os()));
}
