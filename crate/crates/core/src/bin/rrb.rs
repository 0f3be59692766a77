use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    let code = revised_rigid_body::cli::run(std::env::args_os(), &mut io::stdout(), &mut io::stderr());
    ExitCode::from(code as u8)
}
