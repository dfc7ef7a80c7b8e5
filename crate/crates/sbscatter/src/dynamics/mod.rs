//! Time evolution: unitary propagation, asymptotic field operators and their identities,
//! the contour-integral representation of the propagator, and operator estimates.

mod estimates;
mod laplace;
mod overlap;

pub use estimates::{single_mode_ratio, standard_estimate_check, EstimateRatios};
pub use laplace::{laplace_matrix_element, Contour, Segment};
pub use overlap::{fit_envelope_exponent, overlap_decay, EnvelopeFit, OverlapSample};

use crate::error::{Error, Result};
use crate::linalg::{self, hermitian_eigen, vdot, ZERO};
use crate::model::{annihilator, interior_mask, FockBasis, Model, ModeFunction, OperatorMatrix, RadialGrid};
use crate::quad::gauss_legendre;
use faer::Mat;
use num_complex::Complex64 as C64;
use serde::Serialize;
use std::sync::Arc;

/// Spectral representation of a Hermitian operator, for exact unitary evolution.
pub struct Propagator {
    energies: Vec<f64>,
    vectors: Mat<C64>,
    basis: Arc<FockBasis>,
}

impl Propagator {
    pub fn new(op: &OperatorMatrix) -> Result<Self> {
        let scale = (0..op.dim()).map(|i| op.get(i, i).norm()).fold(1.0, f64::max);
        let defect = op.hermiticity_defect();
        if defect > 1e-12 * scale {
            return Err(Error::Invalid(format!("propagation needs a Hermitian matrix (defect {defect:.2e})")));
        }
        let (energies, vectors) = hermitian_eigen(op.entries())?;
        Ok(Self { energies, vectors, basis: op.basis().clone() })
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// e^{-itH} ψ.
    pub fn apply(&self, psi: &[C64], t: f64) -> Vec<C64> {
        let n = self.dim();
        let mut coeffs = vec![ZERO; n];
        for (m, c) in coeffs.iter_mut().enumerate() {
            let v = self.vectors.col(m);
            let proj: C64 = v.iter().zip(psi).map(|(a, b)| a.conj() * b).sum();
            *c = proj * C64::new(0.0, -t * self.energies[m]).exp();
        }
        linalg::matvec(&self.vectors, &coeffs)
    }

    /// The matrix e^{-itH}.
    pub fn unitary(&self, t: f64) -> Mat<C64> {
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for m in 0..n {
            let ph = C64::new(0.0, -t * self.energies[m]).exp();
            for i in 0..n {
                scaled[(i, m)] *= ph;
            }
        }
        &scaled * self.vectors.adjoint()
    }
}

/// e^{-itH} ψ for Hermitian H.
pub fn propagate(op: &OperatorMatrix, psi: &[C64], t: f64) -> Result<Vec<C64>> {
    Ok(Propagator::new(op)?.apply(psi, t))
}

/// a_t(ĥ) = e^{itH} a(ĥ_t) e^{-itH} with ĥ_t = e^{-itω} ĥ.
pub fn a_t(prop: &Propagator, grid: &RadialGrid, h: &ModeFunction, t: f64) -> Result<OperatorMatrix> {
    let a = annihilator(&prop.basis, &h.evolved(grid, t))?;
    let u = prop.unitary(t);
    let m = u.adjoint() * a.entries() * &u;
    OperatorMatrix::new(prop.basis.clone(), m)
}

/// a_t(ĥ) ψ computed through two propagations.
pub fn a_t_apply(prop: &Propagator, grid: &RadialGrid, h: &ModeFunction, t: f64, psi: &[C64]) -> Result<Vec<C64>> {
    let a = annihilator(&prop.basis, &h.evolved(grid, t))?;
    let moved = prop.apply(psi, t);
    Ok(prop.apply(&a.apply(&moved), -t))
}

/// Sparse action of a(ĥ) and a*(ĥ) through the list of creation steps.
pub struct LadderAction {
    steps: Vec<(usize, usize, usize, f64)>,
    dim: usize,
}

impl LadderAction {
    pub fn new(basis: &FockBasis) -> Self {
        Self { steps: basis.creation_steps(), dim: basis.dim() }
    }

    /// a(ĥ) x.
    pub fn lower(&self, h: &ModeFunction, x: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; self.dim];
        for &(lo, j, hi, sq) in &self.steps {
            let amp = h.0[j].conj() * sq;
            for level in 0..2 {
                out[2 * lo + level] += amp * x[2 * hi + level];
            }
        }
        out
    }

    /// a*(ĥ) x.
    pub fn raise(&self, h: &ModeFunction, x: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; self.dim];
        for &(lo, j, hi, sq) in &self.steps {
            let amp = h.0[j] * sq;
            for level in 0..2 {
                out[2 * hi + level] += amp * x[2 * lo + level];
            }
        }
        out
    }
}

/// Truncated commutator C(ĥ) = [a(ĥ), a*(f̂)] = ⟨ĥ, f̂⟩ Π_{<top} - a*(f̂) a(ĥ) Π_top, applied to x.
fn truncated_commutator(ladder: &LadderAction, h: &ModeFunction, f: &ModeFunction, interior: &[bool], x: &[C64]) -> Vec<C64> {
    let hf = h.inner(f);
    let top: Vec<C64> = x.iter().zip(interior).map(|(v, &int)| if int { ZERO } else { *v }).collect();
    let corr = ladder.raise(f, &ladder.lower(h, &top));
    x.iter()
        .zip(interior)
        .zip(corr)
        .map(|((v, &int), c)| if int { hf * v - c } else { -c })
        .collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct IdentityResidual {
    pub t: f64,
    pub residual: f64,
    /// Residual with the s-integral on a ten times finer rule.
    pub residual_fine: f64,
    pub psi_norm: f64,
}

/// ‖a_t(ĥ)ψ - a(ĥ)ψ + ig ∫₀ᵗ e^{isH} σ₁ C(ĥ_s) e^{-isH} ψ ds‖, C the truncated commutator
/// (equal to ⟨ĥ_s, f̂⟩ on the interior sectors).
pub fn finite_time_identity_check(model: &Model, h: &ModeFunction, psi: &[C64], t: f64, panels: usize) -> Result<IdentityResidual> {
    let flat = model.with_params(model.params.with_theta(crate::model::Theta::ZERO))?;
    let op = flat.hamiltonian(0.0)?;
    let prop = Propagator::new(&op)?;
    let f = flat.couplings();
    let interior = interior_mask(&model.basis);
    let ladder = LadderAction::new(&model.basis);
    let g = model.params.g;
    let lhs = {
        let at = prop.apply(&ladder.lower(&h.evolved(&model.grid, t), &prop.apply(psi, t)), -t);
        let a0 = ladder.lower(h, psi);
        at.iter().zip(&a0).map(|(x, y)| x - y).collect::<Vec<_>>()
    };
    let integral = |panels: usize| -> Result<Vec<C64>> {
        let (x, w) = gauss_legendre(20);
        let mut acc = vec![ZERO; psi.len()];
        if t == 0.0 {
            return Ok(acc);
        }
        let step = t / panels as f64;
        for p in 0..panels {
            let a = p as f64 * step;
            for (xi, wi) in x.iter().zip(&w) {
                let s = a + 0.5 * step * (xi + 1.0);
                let moved = prop.apply(psi, s);
                let c = truncated_commutator(&ladder, &h.evolved(&model.grid, s), &f, &interior, &moved);
                let flipped: Vec<C64> = (0..c.len()).map(|i| c[i ^ 1]).collect();
                let back = prop.apply(&flipped, -s);
                linalg::axpy(&mut acc, C64::new(0.5 * step * wi, 0.0), &back);
            }
        }
        Ok(acc)
    };
    let resid = |int: Vec<C64>| -> f64 {
        let ig = C64::new(0.0, g);
        lhs.iter().zip(&int).map(|(l, i)| (l + ig * i).norm_sqr()).sum::<f64>().sqrt()
    };
    let coarse = resid(integral(panels)?);
    let fine = resid(integral(10 * panels)?);
    Ok(IdentityResidual { t, residual: coarse, residual_fine: fine, psi_norm: linalg::norm(psi) })
}

/// max |e^{-isH} a_t(ĥ)* e^{isH} - a_{t-s}(ĥ_s)*| entrywise.
pub fn pull_through_check(prop: &Propagator, grid: &RadialGrid, h: &ModeFunction, t: f64, s: f64) -> Result<f64> {
    let lhs = {
        let at = a_t(prop, grid, h, t)?.adjoint();
        let u = prop.unitary(s);
        &u * at.entries() * u.adjoint()
    };
    let rhs = a_t(prop, grid, &h.evolved(grid, s), t - s)?.adjoint();
    let d = &lhs - rhs.entries();
    let mut m: f64 = 0.0;
    for j in 0..d.ncols() {
        for i in 0..d.nrows() {
            m = m.max(d[(i, j)].norm());
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CommutatorCheck {
    pub lhs: C64,
    pub rhs: C64,
    /// ⟨ĥ, l̂⟩‖Ψ‖², the value on the interior sectors.
    pub interior_value: C64,
    pub residual: f64,
}

/// ⟨a_t(ĥ)*Ψ, a_t(l̂)*Ψ⟩ - ⟨a_t(l̂)Ψ, a_t(ĥ)Ψ⟩ against the truncated-CCR prediction.
pub fn commutation_check(prop: &Propagator, grid: &RadialGrid, h: &ModeFunction, l: &ModeFunction, psi: &[C64], t: f64) -> Result<CommutatorCheck> {
    let ah = a_t(prop, grid, h, t)?;
    let al = a_t(prop, grid, l, t)?;
    let lhs = vdot(&ah.adjoint().apply(psi), &al.adjoint().apply(psi)) - vdot(&al.apply(psi), &ah.apply(psi));
    let basis = &prop.basis;
    let interior = interior_mask(basis);
    let moved = prop.apply(psi, t);
    let inner_norm: f64 = moved.iter().zip(&interior).filter(|(_, &i)| i).map(|(v, _)| v.norm_sqr()).sum();
    let top: Vec<C64> = moved.iter().zip(&interior).map(|(v, &i)| if i { ZERO } else { *v }).collect();
    let a_ht = annihilator(basis, &h.evolved(grid, t))?.apply(&top);
    let a_lt = annihilator(basis, &l.evolved(grid, t))?.apply(&top);
    let hl = h.inner(l);
    let rhs = hl * inner_norm - vdot(&a_lt, &a_ht);
    Ok(CommutatorCheck { lhs, rhs, interior_value: hl * linalg::norm(psi).powi(2), residual: (lhs - rhs).norm() })
}

#[derive(Debug, Clone, Serialize)]
pub struct VanishingRow {
    pub t: f64,
    pub norm: f64,
    pub warning: Option<String>,
}

/// ‖a_t(ĥ)Ψ‖ for each sample time, flagging times beyond half the grid recurrence time.
pub fn asymptotic_vanishing_check(prop: &Propagator, grid: &RadialGrid, h: &ModeFunction, psi0: &[C64], t_samples: &[f64]) -> Result<Vec<VanishingRow>> {
    let half = 0.5 * grid.recurrence_time();
    t_samples
        .iter()
        .map(|&t| {
            let v = a_t_apply(prop, grid, h, t, psi0)?;
            let warning = (t.abs() > half).then(|| format!("t = {t} exceeds half the recurrence time {half:.1}"));
            Ok(VanishingRow { t, norm: linalg::norm(&v), warning })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelParams, QuadratureRule, Theta};

    fn flat(n_modes: usize, n_max: usize, g: f64) -> Model {
        let p = ModelParams { n_modes, n_max, g, theta: Theta::ZERO, ..Default::default() };
        Model::new(p, QuadratureRule::GaussLegendre).unwrap()
    }

    fn probe(grid: &RadialGrid) -> ModeFunction {
        ModeFunction::from_radial(grid, |r| C64::new((-(r - 1.0).powi(2) * 4.0).exp(), 0.0))
    }

    #[test]
    fn propagation_is_unitary_and_trivial_at_zero() {
        let m = flat(10, 2, 0.2);
        let h = m.hamiltonian(0.0).unwrap();
        let prop = Propagator::new(&h).unwrap();
        let psi: Vec<C64> = (0..h.dim()).map(|i| C64::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        let at0 = prop.apply(&psi, 0.0);
        assert!(psi.iter().zip(&at0).all(|(a, b)| (a - b).norm() < 1e-12));
        let later = prop.apply(&psi, 3.7);
        assert!((linalg::norm(&later) - linalg::norm(&psi)).abs() < 1e-10);
    }

    #[test]
    fn propagation_rejects_dilated_matrix() {
        let p = ModelParams { n_modes: 6, n_max: 1, ..Default::default() };
        let m = Model::new(p, QuadratureRule::GaussLegendre).unwrap();
        assert!(Propagator::new(&m.hamiltonian(0.0).unwrap()).is_err());
    }

    #[test]
    fn free_asymptotic_operator_is_static() {
        let m = flat(8, 2, 0.0);
        let prop = Propagator::new(&m.hamiltonian(0.0).unwrap()).unwrap();
        let h = probe(&m.grid);
        let a0 = annihilator(&m.basis, &h).unwrap();
        let at = a_t(&prop, &m.grid, &h, 5.3).unwrap();
        assert!(at.max_abs_diff(&a0) < 1e-12);
    }

    #[test]
    fn identities_hold_on_small_model() {
        let m = flat(8, 2, 0.3);
        let prop = Propagator::new(&m.hamiltonian(0.0).unwrap()).unwrap();
        let h = probe(&m.grid);
        let l = ModeFunction::from_radial(&m.grid, |r| C64::new(r.sin(), 0.2 * r));
        let psi: Vec<C64> = (0..m.basis.dim()).map(|i| C64::new(1.0 / (1.0 + i as f64), 0.0)).collect();
        assert!(pull_through_check(&prop, &m.grid, &h, 2.0, 0.7).unwrap() < 1e-10);
        assert!(commutation_check(&prop, &m.grid, &h, &l, &psi, 1.3).unwrap().residual < 1e-10);
        let r = finite_time_identity_check(&m, &h, &psi, 3.0, 30).unwrap();
        assert!(r.residual < 1e-9 * r.psi_norm, "{r:?}");
        let r0 = finite_time_identity_check(&m, &h, &psi, 0.0, 4).unwrap();
        assert!(r0.residual < 1e-12);
    }
}
