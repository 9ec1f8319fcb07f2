//! Runs every acceptance suite once and prints one line per criterion.
//! Exits non-zero if any criterion fails or overruns its time budget.

use std::process::ExitCode;
use std::time::Duration;

use biembed::suites::{run_suite, SuiteConfig, SUITES};

/// Wall-time budget per suite, in acceptance order.
const BUDGET_SECS: [u64; 13] = [10, 1, 60, 300, 120, 60, 300, 120, 30, 120, 120, 300, 300];

fn main() -> ExitCode {
    let cfg = SuiteConfig::default();
    let mut all_ok = true;
    for (k, (name, budget)) in SUITES.iter().zip(BUDGET_SECS).enumerate() {
        let budget = Duration::from_secs(budget);
        match run_suite(name, &cfg) {
            Ok(report) => {
                let ok = report.passed() && report.wall <= budget;
                all_ok &= ok;
                println!(
                    "{} {:>2} {:<20} cases={:<6} failures={:<3} time={:.2}s budget={}s",
                    if ok { "PASS" } else { "FAIL" },
                    k + 1,
                    name,
                    report.cases,
                    report.failures.len(),
                    report.wall.as_secs_f64(),
                    budget.as_secs(),
                );
                if !report.passed() {
                    print!("{}", report.render());
                }
            }
            Err(e) => {
                all_ok = false;
                println!("FAIL {:>2} {:<20} error: {e}", k + 1, name);
            }
        }
    }
    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
