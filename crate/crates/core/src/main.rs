fn main() {
    std::process::exit(ising_chaos::cli::run(std::env::args_os()));
}
