fn main() {
    let code = polycube_tool::cli::main_with_args(std::env::args_os(), &mut std::io::stderr());
    std::process::exit(code);
}
