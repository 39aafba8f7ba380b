fn main() {
    std::process::exit(dirac_tomography_cli::main_with(std::env::args_os()));
}
