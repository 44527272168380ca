//! Runs the built-in criteria table and prints it as CSV.

use folner::scenario::{run_suite, RunOptions, SuiteSource};

fn main() {
    let start = std::time::Instant::now();
    let report = run_suite(&SuiteSource::BuiltIn, &RunOptions::default()).expect("suite runs");
    print!("{}", report.to_csv());
    eprintln!(
        "{}/{} passed in {:.1?}",
        report.passed(),
        report.rows.len(),
        start.elapsed()
    );
}
