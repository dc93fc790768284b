fn main() {
    std::process::exit(urdf_inspect_cli::run_cli(std::env::args_os()));
}
