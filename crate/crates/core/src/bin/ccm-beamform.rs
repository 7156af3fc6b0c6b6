fn main() {
    std::process::exit(ccm_beamform::cli::main_with_args(std::env::args_os().skip(1)));
}
