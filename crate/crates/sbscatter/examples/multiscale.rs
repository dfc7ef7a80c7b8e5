//! Infrared-cutoff ladder: eigenvalue and projection gaps as the cutoff is lowered,
//! with log-log exponents and the coupling-doubling ratio per level.

use sbscatter::model::{Model, ModelParams, QuadratureRule};
use sbscatter::multiscale::{build_ladder, convergence_report, gap_ratios};
use sbscatter::spectral::{resonances, SolverOptions};

fn main() -> sbscatter::Result<()> {
    let n_modes = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(400);
    let g: f64 = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(0.02);
    let opts = SolverOptions::default();
    let mut reports = Vec::new();
    for g in [g, 2.0 * g] {
        let params = ModelParams { g, n_modes, n_max: 1, ..Default::default() };
        let model = Model::new(params, QuadratureRule::GaussLegendre)?;
        let reference = resonances(&model, 0.0, &opts)?;
        let ladder = build_ladder(&model, 0.5, 0.25, 6, &opts)?;
        let report = convergence_report(&ladder, &reference)?;
        println!("g = {g}");
        println!("{:>3} {:>12} {:>12} {:>12} {:>12}", "n", "rho_n", "gap0", "gap1", "proj_gap");
        for r in &report.rows {
            println!("{:>3} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e}", r.n, r.rho_n, r.gap0, r.gap1, r.proj_gap);
        }
        println!(
            "exponents: gap0 {:.3}  gap1 {:.3}  projection {:.3}",
            report.exponent_gap0, report.exponent_gap1, report.exponent_proj
        );
        reports.push(report);
    }
    println!("ratios when g doubles:");
    for r in gap_ratios(&reports[0].rows, &reports[1].rows) {
        println!("{:>3} {:?} {:?} {:?}", r.n, r.gap0, r.gap1, r.proj_gap);
    }
    Ok(())
}
