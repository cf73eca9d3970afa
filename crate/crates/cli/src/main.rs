use std::process::ExitCode;

fn main() -> ExitCode {
    fdsmooth_cli::run(std::env::args_os())
}
