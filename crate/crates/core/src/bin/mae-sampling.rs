fn main() -> std::process::ExitCode {
    mae_sampling::cli::run()
}
