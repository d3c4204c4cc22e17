fn main() -> std::process::ExitCode {
    rrflow::cli::main()
}
