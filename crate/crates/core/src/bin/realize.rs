fn main() -> std::process::ExitCode {
    realize::cli::main()
}
