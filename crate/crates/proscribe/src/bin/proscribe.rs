use std::process::ExitCode;

fn main() -> ExitCode {
    proscribe::cli::run()
}
