fn main() -> std::process::ExitCode {
    lpfree_core::cli::main()
}
