use std::process::ExitCode;

use cvcoupler_cli::{error_exit_code, parse_invocation, report_exit_code, run, CliError};

fn main() -> ExitCode {
    let inv = match parse_invocation(std::env::args_os()) {
        Ok(inv) => inv,
        Err(e) => {
            match &e {
                CliError::Info(text) => print!("{text}"),
                CliError::Usage(msg) => eprintln!("{}", msg.trim_end()),
            }
            return ExitCode::from(e.exit_code());
        }
    };
    match run(&inv) {
        Ok(report) => {
            print!("{}", report.summary);
            for f in &report.failures {
                eprintln!("error: {}: {}", f.label, f.error);
            }
            ExitCode::from(report_exit_code(&report))
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_exit_code(&e))
        }
    }
}
