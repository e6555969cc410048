fn main() {
    std::process::exit(pnais_bench::cli::run(std::env::args_os()));
}
