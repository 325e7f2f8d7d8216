use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(pestvision_cli::run(std::env::args_os()))
}
