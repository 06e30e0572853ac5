use std::io::{self, Write};
use std::process::ExitCode;

fn main() -> ExitCode {
    let action = match twinsim_cli::parse_args(std::env::args_os()) {
        Ok(action) => action,
        Err(e) => {
            // clap prints its own message; usage problems exit nonzero.
            let _ = e.print();
            return ExitCode::from(if e.exit_code() == 0 { 0 } else { 2 });
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match twinsim_cli::execute(&action, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = out.flush();
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
