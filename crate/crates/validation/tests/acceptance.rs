//! Runs every acceptance criterion and prints one PASS/FAIL line for each,
//! followed by the checks behind any failure. Exits nonzero on failure.
//! With `ACCEPTANCE_VERBOSE` set, every check is listed.

use std::process::ExitCode;

fn main() -> ExitCode {
    let outcomes = distill_validation::all();
    for o in &outcomes {
        println!("{}", o.summary());
    }
    if std::env::var_os("ACCEPTANCE_VERBOSE").is_some() {
        for o in &outcomes {
            println!("criterion {} checks:", o.number);
            for c in &o.checks {
                println!("  [{}] {}: {}", if c.passed { "ok" } else { "FAIL" }, c.name, c.detail);
            }
        }
    }
    let mut failed = false;
    for o in outcomes.iter().filter(|o| !o.passed()) {
        failed = true;
        println!("criterion {} failures:", o.number);
        for c in o.failures() {
            println!("  {}: {}", c.name, c.detail);
        }
    }
    if failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
