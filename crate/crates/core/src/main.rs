use log::LevelFilter;

fn main() {
    env_logger::Builder::new().filter_level(LevelFilter::Warn).format_timestamp(None).init();
    std::process::exit(toeplitz_density::cli::run_from(std::env::args_os()));
}
