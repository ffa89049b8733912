fn main() -> std::process::ExitCode {
    baplab::run_cli(std::env::args_os())
}
