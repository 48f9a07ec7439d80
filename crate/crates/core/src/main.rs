fn main() -> std::process::ExitCode {
    popkit::cli::main()
}
