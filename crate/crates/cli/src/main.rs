fn main() {
    std::process::exit(sta_cli::run(std::env::args_os()));
}
