fn main() {
    std::process::exit(gtensor::cli::main_with_args(std::env::args_os()));
}
