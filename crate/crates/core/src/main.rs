fn main() {
    let code = proxagg::harness::cli::cli_main(std::env::args_os());
    std::process::exit(code);
}
