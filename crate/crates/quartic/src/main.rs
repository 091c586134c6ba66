fn main() -> std::process::ExitCode {
    quartic::cli::run()
}
