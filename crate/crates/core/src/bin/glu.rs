fn main() {
    std::process::exit(glu_core::harness::cli_main(std::env::args_os()));
}
