//! Runs every acceptance criterion at its stated tolerance and prints one
//! PASS/FAIL line per criterion. Exits non-zero if any criterion fails.

use std::process::ExitCode;
use wsfbm::verify::{run_criterion, Level, VerifyOptions, CRITERIA};

fn main() -> ExitCode {
    // Listing requests from the test runner have nothing to enumerate.
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let opts = VerifyOptions {
        level: Level::Full,
        ..VerifyOptions::default()
    };
    let mut failed = Vec::new();
    for &id in CRITERIA.iter() {
        match run_criterion(id, &opts) {
            Ok(report) => {
                println!("{}", report.line());
                if !report.passed {
                    for check in report.checks.iter().filter(|c| !c.passed) {
                        println!(
                            "    failed check {}: value {} target {} tolerance {}",
                            check.label, check.value, check.target, check.tolerance
                        );
                    }
                    failed.push(id);
                }
            }
            Err(e) => {
                println!("FAIL criterion {id}: error {e:#}");
                failed.push(id);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", CRITERIA.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: criteria failed: {failed:?}");
        ExitCode::FAILURE
    }
}
