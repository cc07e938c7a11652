use std::process::ExitCode;

fn main() -> ExitCode {
    objprop::cli::main_with_args(std::env::args_os())
}
