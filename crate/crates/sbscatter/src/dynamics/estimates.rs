use crate::error::Result;
use crate::linalg::spectral_norm;
use crate::model::{annihilator, field_energy, sigma1, Model, ModeFunction, Theta};
use faer::Mat;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Worst observed ratios of operator norm to the relative bound, over random profiles.
#[derive(Debug, Clone, Serialize)]
pub struct EstimateRatios {
    pub trials: usize,
    /// ‖a*(ĥ)(H_f+1)^{-1/2}‖ / (‖ĥ‖ + ‖ĥ/√ω‖)
    pub creation: f64,
    /// ‖a(ĥ)(H_f+1)^{-1/2}‖ / ‖ĥ/√ω‖
    pub annihilation: f64,
    /// ‖V(H_f+1)^{-1/2}‖ / (‖f̂‖ + 2‖f̂/√ω‖)
    pub interaction: f64,
    /// Single-mode annihilation ratios: (observed, closed form) per mode.
    pub single_mode: Vec<(f64, f64)>,
}

/// Exact annihilation ratio for a profile supported on one mode of energy ω:
/// √(N ω / (N ω + 1)) with N the boson cap.
pub fn single_mode_ratio(n_max: usize, omega: f64) -> f64 {
    let n = n_max as f64;
    (n * omega / (n * omega + 1.0)).sqrt()
}

fn right_scaled(m: &Mat<C64>, d: &[f64]) -> Mat<C64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * d[j])
}

pub fn standard_estimate_check(model: &Model, trials: usize, seed: u64) -> Result<EstimateRatios> {
    let basis = &model.basis;
    let grid = &model.grid;
    let resolvent: Vec<f64> = field_energy(grid, basis).iter().map(|e| (e + 1.0).powf(-0.5)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut creation: f64 = 0.0;
    let mut annihilation: f64 = 0.0;
    for _ in 0..trials {
        let h = ModeFunction(
            (0..grid.len())
                .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        );
        let a = annihilator(basis, &h)?;
        let ha = h.norm_over_sqrt_omega(grid);
        let an = spectral_norm(&right_scaled(a.entries(), &resolvent))?;
        let cr = spectral_norm(&right_scaled(a.adjoint().entries(), &resolvent))?;
        annihilation = annihilation.max(an / ha);
        creation = creation.max(cr / (h.norm() + ha));
    }
    let f = model.with_params(model.params.with_theta(Theta::ZERO))?.couplings();
    let a_f = annihilator(basis, &f)?;
    let v = sigma1(basis).matmul(&a_f.adjoint()).entries() + sigma1(basis).matmul(&a_f).entries();
    let interaction = spectral_norm(&right_scaled(&v, &resolvent))? / (f.norm() + 2.0 * f.norm_over_sqrt_omega(grid));
    let single_mode = grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(j, &k)| {
            let mut amp = vec![C64::new(0.0, 0.0); grid.len()];
            amp[j] = C64::new(0.6, -0.8);
            let h = ModeFunction(amp);
            let a = annihilator(basis, &h)?;
            let obs = spectral_norm(&right_scaled(a.entries(), &resolvent))? / h.norm_over_sqrt_omega(grid);
            Ok((obs, single_mode_ratio(basis.n_max(), k)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EstimateRatios { trials, creation, annihilation, interaction, single_mode })
}
