fn main() {
    std::process::exit(arclust_cli::app::main_with(std::env::args_os()));
}
