fn main() {
    std::process::exit(confein_cli::commands::main_with_args(std::env::args_os()));
}
