//! Run a study from TOML text with overrides, the way the command-line tool does,
//! and print its checks and JSON summary.

use sbscatter::config::ExperimentConfig;
use sbscatter::output::to_json_string;
use sbscatter::studies::Study;

fn main() -> sbscatter::Result<()> {
    let text = "seed = 11\n[estimates]\ntrials = 20\n";
    let cfg = ExperimentConfig::parse(text, &["estimates.n_modes=4".to_string()])?;
    let report = Study::Estimates.run(&cfg)?;
    for c in &report.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    for t in &report.tables {
        println!("table {} with {} rows", t.file, t.rows.len());
    }
    print!("{}", to_json_string(&report)?);
    Ok(())
}
