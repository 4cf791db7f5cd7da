fn main() {
    std::process::exit(calderonlab::cli::run());
}
