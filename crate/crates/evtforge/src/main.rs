fn main() {
    std::process::exit(evtforge::cli::main_with(std::env::args_os()));
}
