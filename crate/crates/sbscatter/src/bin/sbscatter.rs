use clap::{Parser, ValueEnum};
use sbscatter::config::ExperimentConfig;
use sbscatter::output::write_json;
use sbscatter::studies::{acceptance_summary, Study, StudyReport};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Resonance,
    Multiscale,
    Scatter,
    Lineshape,
    Laplace,
    Asymptotics,
    Estimates,
    All,
}

/// Resonance, scattering and dynamics experiments for the dilated spin-boson model.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// TOML configuration; defaults are used for anything it omits.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a configuration entry, e.g. `--set model.g=0.02`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn studies(cmd: Command) -> Vec<Study> {
    match cmd {
        Command::Resonance => vec![Study::Resonance],
        Command::Multiscale => vec![Study::Multiscale],
        Command::Scatter => vec![Study::Scatter],
        Command::Lineshape => vec![Study::Lineshape],
        Command::Laplace => vec![Study::Laplace],
        Command::Asymptotics => vec![Study::Asymptotics],
        Command::Estimates => vec![Study::Estimates],
        Command::All => Study::ALL.to_vec(),
    }
}

fn emit(out: &Path, cfg: &ExperimentConfig, report: &StudyReport) -> sbscatter::Result<()> {
    for t in &report.tables {
        t.write(out)?;
    }
    write_json(&out.join(format!("{}.json", report.study)), &json!({ "config": cfg, "report": report }))
}

fn run(cli: &Cli) -> sbscatter::Result<bool> {
    let cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path, &cli.overrides)?,
        None => ExperimentConfig::parse("", &cli.overrides)?,
    };
    std::fs::create_dir_all(&cli.out)?;
    let mut reports = Vec::new();
    for study in studies(cli.command) {
        eprintln!("running {}", study.name());
        let report = study.run_or_flag(&cfg);
        for c in &report.checks {
            eprintln!("  [{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
        for w in &report.warnings {
            eprintln!("  warning: {w}");
        }
        if let Some(e) = &report.error {
            eprintln!("  error: {e}");
        }
        emit(&cli.out, &cfg, &report)?;
        reports.push(report);
    }
    if matches!(cli.command, Command::All) {
        let summary = acceptance_summary(&reports);
        for c in &summary {
            eprintln!("criterion {}: {}", c.criterion, if c.passed { "PASS" } else { "FAIL" });
        }
        write_json(&cli.out.join("acceptance.json"), &json!({ "seed": cfg.seed, "criteria": summary }))?;
    }
    Ok(reports.iter().all(|r| r.complete && r.passed))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
