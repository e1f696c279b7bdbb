fn main() {
    let code = riesz_endpoint::cli::run(std::env::args_os(), &mut std::io::stdout().lock());
    std::process::exit(code);
}
