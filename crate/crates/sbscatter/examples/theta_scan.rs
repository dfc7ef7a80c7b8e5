//! The resonance is independent of the dilation angle once the grid resolves it:
//! the spread of λ₁ over three angles shrinks as the grid is refined.

use sbscatter::model::{Model, ModelParams, QuadratureRule, Theta};
use sbscatter::spectral::{theta_scan, SolverOptions};
use std::f64::consts::PI;

fn main() -> sbscatter::Result<()> {
    let thetas = [PI / 32.0, PI / 24.0, PI / 20.0].map(Theta::imaginary);
    for n_modes in [100, 200, 400] {
        let model = Model::new(ModelParams { n_modes, ..Default::default() }, QuadratureRule::GaussLegendre)?;
        let scan = theta_scan(&model, &thetas, &SolverOptions::default())?;
        println!("{n_modes} modes");
        for r in &scan.rows {
            println!("  theta = {:.5}i  lambda1 = {:.12}{:+.6e}i", r.theta.im, r.lambda1.re, r.lambda1.im);
        }
        println!("  spread: lambda0 {:.2e}  lambda1 {:.2e}", scan.max_dev_lambda0, scan.max_dev_lambda1);
    }
    Ok(())
}
