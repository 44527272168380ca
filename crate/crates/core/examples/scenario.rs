//! Runs a scenario config and writes certificate, report and manifest.
//!
//! `cargo run --example scenario -- scenarios/z2-box-defect.json out/`

use std::path::PathBuf;

use folner::scenario::{run_scenario, RunOptions};

fn main() {
    let mut args = std::env::args().skip(1);
    let config = PathBuf::from(args.next().unwrap_or_else(|| "scenarios/z2-box-defect.json".into()));
    let out_dir = PathBuf::from(args.next().unwrap_or_else(|| "out".into()));
    let rec = run_scenario(&config, &out_dir, &RunOptions::default());
    match (&rec.output, &rec.error) {
        (Some(o), _) => println!("{} -> {}", o.summary, out_dir.display()),
        (_, Some(e)) => eprintln!("error: {e}"),
        _ => {}
    }
    std::process::exit(rec.exit_code);
}
