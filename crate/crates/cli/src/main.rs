fn main() -> std::process::ExitCode {
    nonlocal_nt_cli::main_with(std::env::args_os())
}
