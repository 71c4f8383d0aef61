fn main() {
    std::process::exit(llbfem::cli::cli_main(std::env::args()));
}
