fn main() {
    env_logger::init();
    std::process::exit(ces_demand::cli::run(std::env::args_os()));
}
