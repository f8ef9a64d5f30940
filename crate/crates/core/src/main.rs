fn main() {
    std::process::exit(qtml::cli::run(std::env::args_os()));
}
