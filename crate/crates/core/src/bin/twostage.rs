use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(twostage::harness::cli_main(std::env::args_os()) as u8)
}
