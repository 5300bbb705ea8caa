fn main() -> std::process::ExitCode {
    qrse::cli::main()
}
