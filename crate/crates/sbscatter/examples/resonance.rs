//! Dilated eigenvalues near 0 and e₁ for several couplings, compared with the
//! Fermi golden rule prediction Im λ₁ ≈ g²E_I.

use sbscatter::model::{Model, ModelParams, QuadratureRule};
use sbscatter::spectral::{fermi_golden_rule, resonances, SolverOptions};

fn main() -> sbscatter::Result<()> {
    let n_modes = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(300);
    let base = ModelParams { n_modes, ..Default::default() };
    let e_i = fermi_golden_rule(&base)?;
    println!("E_I = {e_i:.10}");
    println!("{:>6} {:>14} {:>24} {:>10}", "g", "lambda0", "lambda1", "Im/g²E_I");
    for g in [0.1, 0.05, 0.02] {
        let model = Model::new(base.with_g(g), QuadratureRule::GaussLegendre)?;
        let res = resonances(&model, 0.0, &SolverOptions::default())?;
        println!(
            "{g:>6} {:>14.6e} {:>11.8}{:+.4e}i {:>10.6}",
            res.lambda0,
            res.lambda1.re,
            res.lambda1.im,
            res.lambda1.im / (g * g * e_i)
        );
    }
    Ok(())
}
