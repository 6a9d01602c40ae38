fn main() -> std::process::ExitCode {
    macrorealism::cli::main()
}
