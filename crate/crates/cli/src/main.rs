fn main() {
    std::process::exit(matmono_cli::run(std::env::args_os()));
}
