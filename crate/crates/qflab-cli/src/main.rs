fn main() {
    std::process::exit(qflab_cli::execute(std::env::args_os()));
}
