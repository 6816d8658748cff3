//! One PASS/FAIL line per acceptance criterion; tolerances are pinned in
//! `kjellberg_cli::criteria::tol`. The process fails if any criterion does.

use std::path::Path;
use std::process::ExitCode;

use kjellberg_cli::criteria::{run, COUNT, TITLES};

fn main() -> ExitCode {
    let exe = Path::new(env!("CARGO_BIN_EXE_kjellberg"));
    let mut failed = Vec::new();
    println!("acceptance: {COUNT} criteria");
    for id in 1..=COUNT {
        match run(id, Some(exe)) {
            Ok(outcome) => {
                println!("{}", outcome.line());
                if !outcome.passed {
                    failed.push(id);
                }
            }
            Err(e) => {
                println!("FAIL criterion {id:>2} ({}): error: {e}", TITLES[id - 1]);
                failed.push(id);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {COUNT} criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} of {COUNT} failed: {failed:?}", failed.len());
        ExitCode::FAILURE
    }
}
