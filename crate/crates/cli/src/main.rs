fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let status = metric_entropy_cli::run(std::env::args_os());
    std::process::exit(status.0);
}
