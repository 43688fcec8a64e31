use std::process::ExitCode;

fn main() -> ExitCode {
    shotnoise::cli::main_with_args(std::env::args_os())
}
