//! Runs without the test harness so the table is printed even when every
//! criterion passes.

use std::process::ExitCode;

use mmslab::acceptance::{run, CRITERIA};

fn main() -> ExitCode {
    // `cargo test -- --list` and filters target the harnessed tests.
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let mut failed = vec![];
    for id in 1..=CRITERIA {
        let out = run(id);
        println!("{}", out.line());
        if !out.passed {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: {CRITERIA}/{CRITERIA} passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
