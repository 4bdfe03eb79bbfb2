use std::process::ExitCode;

fn main() -> ExitCode {
    kalpha::cli::main_with(std::env::args_os())
}
