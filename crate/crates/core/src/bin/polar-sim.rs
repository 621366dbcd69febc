fn main() {
    std::process::exit(polar_dts::cli::run(std::env::args_os()));
}
