fn main() {
    std::process::exit(spi3d::cli::run(std::env::args_os()));
}
