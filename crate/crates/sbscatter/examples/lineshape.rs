//! On-shell |T_P(k, k')|² across the resonance and its Lorentzian fit.

use sbscatter::model::{Model, ModelParams, QuadratureRule};
use sbscatter::scattering::{fit_lorentzian, lineshape_scan};
use sbscatter::spectral::{resonances, SolverOptions};

fn main() -> sbscatter::Result<()> {
    let g = 0.05;
    let model = Model::new(ModelParams { g, ..Default::default() }, QuadratureRule::GaussLegendre)?;
    let res = resonances(&model, 0.0, &SolverOptions::default())?;
    let kprimes: Vec<f64> = (0..=800).map(|i| 0.8 + 0.4 * i as f64 / 800.0).collect();
    let rows = lineshape_scan(&res, &model.params, &kprimes)?;
    let peak = rows.iter().map(|r| r.abs2).fold(0.0, f64::max);
    for r in rows.iter().step_by(40) {
        let bar = "#".repeat((60.0 * r.abs2 / peak).round() as usize);
        println!("{:.3} {:>11.4e} {bar}", r.kprime, r.abs2);
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows.iter().filter(|r| r.abs2 >= 0.2 * peak).map(|r| (r.kprime, r.abs2)).unzip();
    let fit = fit_lorentzian(&xs, &ys)?;
    println!("fit centre {:.6}  expected {:.6}", fit.center, res.lambda1.re - res.lambda0);
    println!("fit FWHM   {:.6}  expected {:.6}", fit.fwhm, 2.0 * res.lambda1.im.abs());
    Ok(())
}
