use std::process::ExitCode;

fn main() -> ExitCode {
    lipseg::cli::main_with_args(std::env::args_os())
}
