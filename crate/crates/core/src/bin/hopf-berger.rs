fn main() {
    std::process::exit(hopf_berger::cli::run(std::env::args_os()));
}
