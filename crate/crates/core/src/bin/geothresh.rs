use std::process::ExitCode;

use clap::Parser;
use geothresh::harness::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(rec) => {
            if let Some(path) = &cli.out {
                if let Err(e) = rec.save(path) {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            }
            match rec.to_json() {
                Ok(json) => println!("{json}"),
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            }
            for c in &rec.checks {
                eprintln!("{} {}: measured {} limit {} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.measured, c.limit, c.detail);
            }
            if rec.passed { ExitCode::SUCCESS } else { ExitCode::from(1) }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}
