//! Runs every acceptance criterion, printing one PASS/FAIL line each.
//! Exits non-zero when any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use fhs_suite::{Criterion, CRITERIA};

fn main() -> ExitCode {
    let mut failed = 0;
    for Criterion { id, name, limit_secs: limit, check } in CRITERIA {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let result = match result {
            Ok(detail) if elapsed > Duration::from_secs(limit) => {
                Err(format!("{detail}; took {elapsed:.2?}, limit {limit} s"))
            }
            other => other,
        };
        match result {
            Ok(detail) => println!("PASS {id:>2} {name} [{elapsed:.2?}]: {detail}"),
            Err(reason) => {
                failed += 1;
                println!("FAIL {id:>2} {name} [{elapsed:.2?}]: {reason}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", CRITERIA.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
