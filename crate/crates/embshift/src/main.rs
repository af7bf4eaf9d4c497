use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(embshift::cli::run(std::env::args_os()))
}
