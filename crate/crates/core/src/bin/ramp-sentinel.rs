fn main() {
    std::process::exit(ramp_sentinel::cli::main());
}
