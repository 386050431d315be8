use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(selmut::cli::run(std::env::args()) as u8)
}
