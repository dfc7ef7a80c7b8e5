//! Heisenberg-picture annihilators: the finite-time integral identity, decay of
//! ‖a(h_t)Ψ₀‖ before the grid recurrence, and power-law decay of the profile overlap.

use sbscatter::dynamics::{asymptotic_vanishing_check, finite_time_identity_check, fit_envelope_exponent, overlap_decay, Propagator};
use sbscatter::model::{Model, ModeFunction, ModelParams, QuadratureRule, Theta};
use sbscatter::scattering::Bump;
use sbscatter::spectral::ground_state;
use sbscatter::C64;

fn main() -> sbscatter::Result<()> {
    let bump = Bump { center: 1.0, half_width: 0.5 };
    let radial = |r: f64| C64::new(bump.eval(r), 0.0);

    let small = ModelParams { g: 0.05, n_modes: 10, n_max: 2, theta: Theta::ZERO, ..Default::default() };
    let model = Model::new(small, QuadratureRule::GaussLegendre)?;
    let h = ModeFunction::from_radial(&model.grid, radial);
    let psi: Vec<C64> = (0..model.basis.dim()).map(|i| C64::new(1.0, (i % 5) as f64)).collect();
    for t in [1.0, 10.0, 50.0] {
        let r = finite_time_identity_check(&model, &h, &psi, t, 200)?;
        println!("identity residual at t = {t}: {:.2e} (finer rule {:.2e})", r.residual, r.residual_fine);
    }

    let big = Model::new(ModelParams { n_modes: 400, theta: Theta::ZERO, ..Default::default() }, QuadratureRule::GaussLegendre)?;
    let hamiltonian = big.hamiltonian(0.0)?;
    let prop = Propagator::new(&hamiltonian)?;
    let psi0: Vec<C64> = ground_state(&hamiltonian)?.psi0(&big.basis).iter().map(|&x| C64::new(x, 0.0)).collect();
    let hb = ModeFunction::from_radial(&big.grid, radial);
    for row in asymptotic_vanishing_check(&prop, &big.grid, &hb, &psi0, &[0.0, 10.0, 50.0, 100.0, 200.0, 300.0])? {
        println!("t = {:>5}: |a(h_t) psi0| = {:.3e} {}", row.t, row.norm, row.warning.unwrap_or_default());
    }

    let s: Vec<f64> = (0..400).map(|i| 10.0 * 100f64.powf(i as f64 / 399.0)).collect();
    let overlaps = overlap_decay(radial, bump.support(), &big.params, &s)?;
    let fit = fit_envelope_exponent(&overlaps, 10.0, 1000.0, 20, 1e-13)?;
    println!("overlap envelope ~ s^{:.3} over {} bins", fit.exponent, fit.bins_used);
    Ok(())
}
