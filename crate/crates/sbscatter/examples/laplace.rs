//! Matrix elements of e^{-itH^θ} from the inverse-Laplace contour integral of the
//! resolvent, checked against direct exponentiation of the same matrix.

use sbscatter::dynamics::{laplace_matrix_element, Contour};
use sbscatter::linalg::{exp_minus_it, matvec, vdot};
use sbscatter::model::{Model, ModelParams, QuadratureRule, Theta};
use sbscatter::spectral::{eigensolve, locate_resonances};
use sbscatter::C64;
use std::f64::consts::PI;

fn main() -> sbscatter::Result<()> {
    let params = ModelParams { g: 0.2, n_modes: 20, theta: Theta::imaginary(PI / 24.0), ..Default::default() };
    let model = Model::new(params, QuadratureRule::GaussLegendre)?;
    let h = model.hamiltonian(0.0)?;
    let eigs = eigensolve(&h)?;
    let spectrum: Vec<C64> = eigs.iter().map(|e| e.value).collect();
    let res = locate_resonances(&eigs, &model.basis, &model.params)?;
    let contour = Contour::new(res.lambda0_theta.re, 0.05, 2.0, PI / 64.0)?;
    let n = h.dim();
    let phi: Vec<C64> = (0..n).map(|i| C64::new(1.0, 0.1 * i as f64) / n as f64).collect();
    let psi: Vec<C64> = (0..n).map(|i| C64::new((i % 3) as f64, -1.0) / n as f64).collect();
    for t in [0.1, 1.0, 10.0, 30.0] {
        let c = laplace_matrix_element(h.entries(), &spectrum, &phi, &psi, t, &contour, 1e-9)?;
        let direct = vdot(&psi, &matvec(&exp_minus_it(h.entries(), t)?, &phi));
        println!(
            "t = {t:>5}: contour {:.12e}{:+.12e}i  |diff| {:.2e}  ({} evaluations)",
            c.value.re,
            c.value.im,
            (c.value - direct).norm(),
            c.evaluations
        );
    }
    Ok(())
}
