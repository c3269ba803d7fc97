fn main() {
    let code = rqbench::cli::run(std::env::args_os());
    std::process::exit(code);
}
