mod args;
mod commands;
mod report;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use gpsrh_core::{Error, ErrorClass};

use args::{Cli, Command, Common, Format};
use report::RunReport;

const EXIT_DOMAIN: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, result) = match &cli.command {
        Command::Stability(a) => (a, commands::stability(a)),
        Command::Solve(a) => (&a.common, commands::solve(a)),
        Command::Asymptotics(a) => (&a.common, commands::asymptotics(a)),
        Command::Oracle(a) => (&a.common, commands::oracle(a)),
        Command::Validate(a) => (&a.common, commands::validate(a)),
    };
    match result {
        Ok(report) => {
            if let Err(e) = emit(common, &report) {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_INPUT);
            }
            exit_status(&report)
        }
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(match e.class() {
                ErrorClass::Input => EXIT_INPUT,
                ErrorClass::Domain => EXIT_DOMAIN,
                ErrorClass::Numerical => EXIT_NUMERICAL,
            })
        }
    }
}

fn describe(e: &Error) -> String {
    match e {
        Error::InvalidParameter { name, value, reason } => {
            format!("invalid value {value} for --{name}: {reason}")
        }
        other => other.to_string(),
    }
}

fn exit_status(report: &RunReport) -> ExitCode {
    if report.stability.is_some_and(|s| !s.verdict.stable) {
        return ExitCode::from(EXIT_DOMAIN);
    }
    if !report.all_checks_pass() {
        return ExitCode::from(EXIT_NUMERICAL);
    }
    ExitCode::SUCCESS
}

fn emit(common: &Common, report: &RunReport) -> std::io::Result<()> {
    let text = match common.format {
        Format::Json => report::to_json(report),
        Format::Table => report::to_table(report),
    };
    match &common.out {
        // oracle treats --out as the export directory
        Some(dir) if report.command == "oracle" => {
            let name = match common.format {
                Format::Json => "report.json",
                Format::Table => "report.txt",
            };
            std::fs::write(dir.join(name), &text)?;
            print!("{text}");
            Ok(())
        }
        Some(path) => std::fs::write(path, &text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}
