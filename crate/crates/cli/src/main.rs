mod args;
mod commands;
mod report;

use std::fs;
use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde_json::Value;

use args::{Cli, Format};
use commands::{Failure, Output};
use report::write_json;

fn render(output: &Output, format: Format) -> Result<String, Failure> {
    match (output, format) {
        (Output::Report(r), Format::Json) => Ok(r.to_json()),
        (Output::Report(r), Format::Csv) => r
            .table
            .to_csv()
            .map_err(|e| Failure::Compute(format!("csv output: {e}"))),
        (Output::System { json, .. }, Format::Json) => {
            // Re-render so system files follow the same float format as reports.
            let v: Value = serde_json::from_str(json).expect("system JSON parses");
            let mut out = String::new();
            write_json(&mut out, &v, 0);
            out.push('\n');
            Ok(out)
        }
        (Output::System { .. }, Format::Csv) => Err(Failure::Usage(
            "this subcommand writes a system file; use --format json".into(),
        )),
    }
}

fn execute(cli: &Cli) -> Result<bool, Failure> {
    let output = commands::run(&cli.command, cli.common.seed)?;
    let text = render(&output, cli.common.format)?;
    match &cli.common.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::Compute(format!("{}: {e}", path.display())))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::Compute(format!("stdout: {e}")))?;
        }
    }
    for c in output.checks().iter().filter(|c| !c.passed) {
        match &c.detail {
            Some(d) => eprintln!("zp-lab: check `{}` failed ({d})", c.name),
            None => eprintln!("zp-lab: check `{}` failed", c.name),
        }
    }
    Ok(output.checks().iter().all(|c| c.passed))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let start = Instant::now();
    let result = execute(&cli);
    eprintln!(
        "zp-lab: seed {}, {:.3}s",
        cli.common.seed,
        start.elapsed().as_secs_f64()
    );
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("zp-lab: {}", f.message());
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
