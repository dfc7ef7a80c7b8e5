//! Eigenvalues of the dilated Hamiltonian: ground state, resonance, projections and probes.

use crate::error::{Error, Result};
use crate::linalg::{self, dotu, eigen, matvec, norm, symmetric_eigen, ShiftedLu, ONE, ZERO};
use crate::model::{form_factor, FockBasis, Level, Model, ModelParams, OperatorMatrix, Theta};
use faer::Mat;
use num_complex::Complex64 as C64;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: C64,
    /// Unit Euclidean norm.
    pub vector: Vec<C64>,
}

/// Full dense eigendecomposition.
pub fn eigensolve(op: &OperatorMatrix) -> Result<Vec<EigenPair>> {
    let (vals, vecs) = eigen(op.entries())?;
    if vals.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Solver(format!("non-finite eigenvalue, dimension {}", op.dim())));
    }
    Ok(vals
        .into_iter()
        .enumerate()
        .map(|(j, value)| EigenPair { value, vector: linalg::col_to_vec(&vecs, j) })
        .collect())
}

/// Rank-one projection P = r lᵀ with lᵀr = 1 (bilinear pairing).
#[derive(Debug, Clone)]
pub struct RankOneProjection {
    pub right: Vec<C64>,
    pub left: Vec<C64>,
}

impl RankOneProjection {
    /// Projection onto the eigenvector `v` of a complex-symmetric matrix, whose left
    /// eigenvector is v itself.
    pub fn symmetric(v: &[C64]) -> Result<Self> {
        let s = dotu(v, v);
        if s.norm() < 1e-14 * norm(v).powi(2) {
            return Err(Error::Solver("quasi-null eigenvector: vᵀv vanishes".into()));
        }
        Ok(Self { right: v.to_vec(), left: v.iter().map(|x| x / s).collect() })
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let c = dotu(&self.left, x);
        self.right.iter().map(|r| r * c).collect()
    }

    pub fn dense(&self) -> Mat<C64> {
        let n = self.right.len();
        Mat::from_fn(n, n, |i, j| self.right[i] * self.left[j])
    }

    pub fn trace(&self) -> C64 {
        dotu(&self.left, &self.right)
    }
}

/// Spectral norm of (r₁l₁ᵀ - r₂l₂ᵀ) via a 4-dimensional orthonormal frame.
pub fn rank_two_difference_norm(a: &RankOneProjection, b: &RankOneProjection) -> Result<f64> {
    let mut cols: Vec<Vec<C64>> = Vec::new();
    let mut rows: Vec<Vec<C64>> = Vec::new();
    let gram_schmidt = |set: &mut Vec<Vec<C64>>, v: &[C64]| {
        let mut w = v.to_vec();
        for _ in 0..2 {
            for q in set.iter() {
                let c = linalg::vdot(q, &w);
                linalg::axpy(&mut w, -c, q);
            }
        }
        let n = norm(&w);
        if n > 1e-14 * norm(v).max(1e-300) {
            set.push(w.iter().map(|x| x / n).collect());
        }
    };
    gram_schmidt(&mut cols, &a.right);
    gram_schmidt(&mut cols, &b.right);
    let la: Vec<C64> = a.left.iter().map(|x| x.conj()).collect();
    let lb: Vec<C64> = b.left.iter().map(|x| x.conj()).collect();
    gram_schmidt(&mut rows, &la);
    gram_schmidt(&mut rows, &lb);
    // D = Σ r lᵀ; its matrix in the frames is Q_colsᴴ D Q_rows.
    let small = Mat::from_fn(cols.len(), rows.len(), |i, j| {
        let term = |p: &RankOneProjection, sign: f64| {
            linalg::vdot(&cols[i], &p.right) * dotu(&p.left, &rows[j]) * sign
        };
        term(a, 1.0) + term(b, -1.0)
    });
    if small.nrows() == 0 || small.ncols() == 0 {
        return Ok(0.0);
    }
    linalg::spectral_norm(&small)
}

/// Ground state of the self-adjoint (θ = 0) model.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    /// Unit eigenvector with non-negative φ₀⊗Ω component.
    pub vector: Vec<f64>,
}

impl GroundState {
    pub fn from_symmetric_eigen(vals: &[f64], vecs: &Mat<f64>, basis: &FockBasis) -> Self {
        let e0 = basis.vacuum(Level::Ground);
        let mut v: Vec<f64> = vecs.col(0).iter().copied().collect();
        if v[e0] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        Self { energy: vals[0], vector: v }
    }

    /// ‖Ψ_{λ₀}‖ for Ψ_{λ₀} = P₀ φ₀⊗Ω, i.e. |⟨v, φ₀⊗Ω⟩|.
    pub fn norm_psi0(&self, basis: &FockBasis) -> f64 {
        self.vector[basis.vacuum(Level::Ground)].abs()
    }

    /// Ψ_{λ₀} = ⟨v, φ₀⊗Ω⟩ v.
    pub fn psi0(&self, basis: &FockBasis) -> Vec<f64> {
        let c = self.vector[basis.vacuum(Level::Ground)];
        self.vector.iter().map(|x| x * c).collect()
    }
}

/// Ground state of `op`, which must be the real symmetric θ = 0 matrix.
pub fn ground_state(op: &OperatorMatrix) -> Result<GroundState> {
    let real = op
        .real_entries()
        .ok_or_else(|| Error::Solver("ground state requires the real θ = 0 matrix".into()))?;
    let (vals, vecs) = symmetric_eigen(&real)?;
    Ok(GroundState::from_symmetric_eigen(&vals, &vecs, op.basis()))
}

/// λ₀, λ₁ and their spectral data.
#[derive(Debug, Clone)]
pub struct ResonanceData {
    pub g: f64,
    /// Ground-state energy (real).
    pub lambda0: f64,
    /// The same eigenvalue as returned by the dilated solve; its imaginary part is solver noise.
    pub lambda0_theta: C64,
    pub lambda1: C64,
    /// Ψ^θ_{λ₀} = P₀^θ φ₀⊗Ω.
    pub psi0_theta: Vec<C64>,
    /// Ψ^θ̄_{λ₀}; H^θ̄ = conj(H^θ), so this is the conjugate of `psi0_theta`.
    pub psi0_bar_theta: Vec<C64>,
    pub norm_psi0: f64,
    pub p1_theta: RankOneProjection,
    /// E₁ = g⁻² Im λ₁ (NaN at g = 0).
    pub rate_coefficient: f64,
    pub overlap0: f64,
    pub overlap1: f64,
}

fn overlap_with(v: &[C64], idx: usize) -> f64 {
    v[idx].norm() / norm(v)
}

fn pick_by_overlap(eigs: &[EigenPair], idx: usize, near: f64) -> Result<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, e) in eigs.iter().enumerate() {
        let ov = overlap_with(&e.vector, idx);
        best = match best {
            None => Some((i, ov)),
            Some((j, bo)) => {
                let tie = (ov - bo).abs() < 1e-12;
                let closer = (e.value - near).norm() < (eigs[j].value - near).norm();
                if ov > bo + 1e-12 || (tie && closer) {
                    Some((i, ov))
                } else {
                    Some((j, bo))
                }
            }
        };
    }
    let (i, ov) = best.ok_or_else(|| Error::Solver("empty spectrum".into()))?;
    if ov < 0.5 {
        return Err(Error::Ambiguous(format!("best overlap {ov:.3} with basis state {idx} is below 0.5")));
    }
    Ok((i, ov))
}

fn assemble_resonance(g: f64, l0: (C64, Vec<C64>, f64), l1: (C64, Vec<C64>, f64), basis: &FockBasis) -> Result<ResonanceData> {
    let e0 = basis.vacuum(Level::Ground);
    let p0 = RankOneProjection::symmetric(&l0.1)?;
    let psi0_theta = p0.apply(&linalg::unit(basis.dim(), e0));
    let psi0_bar_theta = psi0_theta.iter().map(|z| z.conj()).collect();
    let norm_psi0 = norm(&psi0_theta);
    let p1_theta = RankOneProjection::symmetric(&l1.1)?;
    let rate_coefficient = if g > 0.0 { l1.0.im / (g * g) } else { f64::NAN };
    Ok(ResonanceData {
        g,
        lambda0: l0.0.re,
        lambda0_theta: l0.0,
        lambda1: l1.0,
        psi0_theta,
        psi0_bar_theta,
        norm_psi0,
        p1_theta,
        rate_coefficient,
        overlap0: l0.2,
        overlap1: l1.2,
    })
}

/// Identify λ₀ and λ₁ by maximal overlap with φ₀⊗Ω and φ₁⊗Ω.
pub fn locate_resonances(eigs: &[EigenPair], basis: &FockBasis, params: &ModelParams) -> Result<ResonanceData> {
    let (i0, o0) = pick_by_overlap(eigs, basis.vacuum(Level::Ground), 0.0)?;
    let (i1, o1) = pick_by_overlap(eigs, basis.vacuum(Level::Excited), params.e1)?;
    assemble_resonance(
        params.g,
        (eigs[i0].value, eigs[i0].vector.clone(), o0),
        (eigs[i1].value, eigs[i1].vector.clone(), o1),
        basis,
    )
}

/// Settings for [`resonances`].
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Above this dimension, λ₀ and λ₁ come from shift-invert Krylov solves.
    pub dense_limit: usize,
    pub krylov_dim: usize,
    pub residual_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { dense_limit: 1500, krylov_dim: 40, residual_tol: 1e-12 }
    }
}

/// One eigenpair of `a`: shift-invert Arnoldi around `shift` started from the basis vector
/// `target`, Ritz vector chosen by overlap with `target`, then inverse-iteration polish.
pub fn targeted_eigenpair(a: &Mat<C64>, shift: C64, target: usize, opts: &SolverOptions) -> Result<(C64, Vec<C64>, f64)> {
    let n = a.nrows();
    let m = opts.krylov_dim.min(n);
    let lu = ShiftedLu::new(a, shift);
    let mut basis: Vec<Vec<C64>> = vec![linalg::unit(n, target)];
    let mut h = Mat::<C64>::zeros(m + 1, m);
    let mut steps = m;
    for k in 0..m {
        let mut w = lu.solve(&basis[k]);
        for _ in 0..2 {
            for (i, q) in basis.iter().enumerate() {
                let c = linalg::vdot(q, &w);
                h[(i, k)] += c;
                linalg::axpy(&mut w, -c, q);
            }
        }
        let nw = norm(&w);
        h[(k + 1, k)] = C64::new(nw, 0.0);
        if nw < 1e-13 * h[(k, k)].norm().max(1.0) {
            steps = k + 1;
            break;
        }
        basis.push(w.iter().map(|x| x / nw).collect());
    }
    let hm = Mat::from_fn(steps, steps, |i, j| h[(i, j)]);
    let (ritz, y) = eigen(&hm)?;
    let mut best: Option<(f64, C64, Vec<C64>)> = None;
    for (j, &mu) in ritz.iter().enumerate() {
        if mu.norm() == 0.0 {
            continue;
        }
        let mut x = vec![ZERO; n];
        for i in 0..steps {
            linalg::axpy(&mut x, y[(i, j)], &basis[i]);
        }
        let ov = overlap_with(&x, target);
        if best.as_ref().is_none_or(|b| ov > b.0) {
            best = Some((ov, shift + ONE / mu, x));
        }
    }
    let (_, mut lambda, mut x) = best.ok_or_else(|| Error::Solver("Krylov space collapsed".into()))?;
    let scale = a.norm_l2().max(1.0);
    let polish = ShiftedLu::new(a, lambda);
    let mut resid = f64::INFINITY;
    for _ in 0..30 {
        let y = polish.solve(&x);
        let ny = norm(&y);
        x = y.iter().map(|v| v / ny).collect();
        let ax = matvec(a, &x);
        lambda = dotu(&x, &ax) / dotu(&x, &x);
        resid = ax.iter().zip(&x).map(|(p, q)| (p - lambda * q).norm_sqr()).sum::<f64>().sqrt();
        if resid < opts.residual_tol * scale {
            break;
        }
    }
    if !(resid < 1e3 * opts.residual_tol * scale) {
        return Err(Error::Solver(format!("inverse iteration stalled at residual {resid:.2e}")));
    }
    let ov = overlap_with(&x, target);
    if ov < 0.5 {
        return Err(Error::Ambiguous(format!("targeted eigenvector overlap {ov:.3} is below 0.5")));
    }
    Ok((lambda, x, ov))
}

/// Resonance data of `model` with couplings below `ir_cutoff` removed.
///
/// λ₀ and ‖Ψ_{λ₀}‖ are taken from the self-adjoint model (λ₀ does not depend on θ);
/// λ₁, P₁^θ and Ψ^θ_{λ₀} come from the dilated matrix.
pub fn resonances(model: &Model, ir_cutoff: f64, opts: &SolverOptions) -> Result<ResonanceData> {
    let h = model.hamiltonian(ir_cutoff)?;
    let basis = model.basis.as_ref();
    let mut data = if h.dim() <= opts.dense_limit {
        locate_resonances(&eigensolve(&h)?, basis, &model.params)?
    } else {
        let l0 = targeted_eigenpair(h.entries(), ZERO, basis.vacuum(Level::Ground), opts)?;
        let l1 = targeted_eigenpair(h.entries(), C64::new(model.params.e1, 0.0), basis.vacuum(Level::Excited), opts)?;
        assemble_resonance(model.params.g, l0, l1, basis)?
    };
    if !model.params.theta.is_zero() {
        let flat = model.with_params(model.params.with_theta(Theta::ZERO))?;
        let h0 = flat.hamiltonian(ir_cutoff)?;
        let gs = if h0.dim() <= opts.dense_limit {
            ground_state(&h0)?
        } else {
            let (e, v, _) = targeted_eigenpair(h0.entries(), ZERO, basis.vacuum(Level::Ground), opts)?;
            let phase = v[basis.vacuum(Level::Ground)];
            let phase = phase / phase.norm();
            GroundState { energy: e.re, vector: v.iter().map(|z| (z / phase).re).collect() }
        };
        data.lambda0 = gs.energy;
        data.norm_psi0 = gs.norm_psi0(basis);
    }
    Ok(data)
}

/// E_I = -4π² e₁² f(e₁)², the second-order coefficient of Im λ₁.
pub fn fermi_golden_rule(p: &ModelParams) -> Result<f64> {
    let f = form_factor(p, p.e1)?;
    Ok(-4.0 * PI * PI * p.e1 * p.e1 * f * f)
}

/// P = (2πi)⁻¹ ∮ (z - H)⁻¹ dz on a circle, trapezoidal rule with `n_quad` points.
pub fn riesz_projection(op: &OperatorMatrix, center: C64, radius: f64, n_quad: usize) -> Result<OperatorMatrix> {
    let vals = op
        .entries()
        .eigenvalues()
        .map_err(|e| Error::Solver(format!("eigenvalues: {e:?}")))?;
    let inside = vals.iter().filter(|v| (*v - center).norm() < radius).count();
    let closest = vals.iter().map(|v| ((*v - center).norm() - radius).abs()).fold(f64::INFINITY, f64::min);
    if closest < 10.0 * radius * f64::EPSILON {
        return Err(Error::Contour(format!("circle passes within {closest:.2e} of the spectrum")));
    }
    if inside != 1 {
        return Err(Error::Contour(format!("circle encloses {inside} eigenvalues, expected 1")));
    }
    let n = op.dim();
    let eye = Mat::<C64>::identity(n, n);
    let mut p = Mat::<C64>::zeros(n, n);
    for k in 0..n_quad {
        let e = C64::from_polar(1.0, 2.0 * PI * k as f64 / n_quad as f64);
        let z = center + e * radius;
        // (z - H)⁻¹ = -(H - z)⁻¹; dz/(2πi) = r e^{iφ} dφ / (2π).
        let r = ShiftedLu::new(op.entries(), z).solve_mat(&eye);
        let w = -e * radius / n_quad as f64;
        p += &r * faer::Scale(w);
    }
    OperatorMatrix::new(op.basis().clone(), p)
}

#[derive(Debug, Clone, Serialize)]
pub struct ThetaRow {
    pub theta: C64,
    pub lambda0: f64,
    pub lambda0_theta: C64,
    pub lambda1: C64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThetaScan {
    pub rows: Vec<ThetaRow>,
    pub max_dev_lambda0: f64,
    pub max_dev_lambda1: f64,
}

fn max_pairwise(vals: &[C64]) -> f64 {
    let mut m: f64 = 0.0;
    for (i, a) in vals.iter().enumerate() {
        for b in &vals[i + 1..] {
            m = m.max((a - b).norm());
        }
    }
    m
}

/// λ₀, λ₁ for each dilation; the spread of λ₀ uses the dilated eigenvalue.
pub fn theta_scan(model: &Model, thetas: &[Theta], opts: &SolverOptions) -> Result<ThetaScan> {
    let rows = thetas
        .iter()
        .map(|&th| {
            let m = model.with_params(model.params.with_theta(th))?;
            let r = resonances(&m, 0.0, opts)?;
            Ok(ThetaRow { theta: th.0, lambda0: r.lambda0, lambda0_theta: r.lambda0_theta, lambda1: r.lambda1 })
        })
        .collect::<Result<Vec<_>>>()?;
    let l0: Vec<C64> = rows.iter().map(|r| r.lambda0_theta).collect();
    let l1: Vec<C64> = rows.iter().map(|r| r.lambda1).collect();
    Ok(ThetaScan { max_dev_lambda0: max_pairwise(&l0), max_dev_lambda1: max_pairwise(&l1), rows })
}

/// Region of the complex plane used to organize resolvent bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Region {
    A,
    B0,
    B1,
    /// Below the B strips and outside A.
    Other,
}

/// Region tag with δ = e₁, angle ν, and first cutoff ρ₁.
pub fn region(z: C64, e1: f64, nu: f64, rho1: f64) -> Region {
    let delta = e1;
    let a1 = z.re < -delta / 2.0;
    let a2 = z.im > delta * nu.sin() / 8.0;
    let a3 = z.re > e1 + delta / 2.0 && z.im >= -(nu / 2.0).sin() * (z.re - (e1 + delta / 2.0));
    if a1 || a2 || a3 {
        return Region::A;
    }
    let strip = z.im >= -0.5 * rho1 * nu.sin() && z.im <= delta * nu.sin() / 8.0;
    if strip && z.re.abs() <= delta / 2.0 {
        Region::B0
    } else if strip && (z.re - e1).abs() <= delta / 2.0 {
        Region::B1
    } else {
        Region::Other
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolventSample {
    pub z: C64,
    pub region: Region,
    /// ‖(H - z)⁻¹‖, absent when the sample was skipped.
    pub norm: Option<f64>,
    pub warning: Option<String>,
}

/// Spectral norm of the resolvent at each sample, skipping samples within `margin` of the spectrum.
pub fn resolvent_probe(op: &OperatorMatrix, samples: &[C64], e1: f64, nu: f64, rho1: f64, margin: f64) -> Result<Vec<ResolventSample>> {
    let vals = op.entries().eigenvalues().map_err(|e| Error::Solver(format!("eigenvalues: {e:?}")))?;
    samples
        .iter()
        .map(|&z| {
            let dist = vals.iter().map(|v| (v - z).norm()).fold(f64::INFINITY, f64::min);
            let region = region(z, e1, nu, rho1);
            if dist < margin {
                return Ok(ResolventSample {
                    z,
                    region,
                    norm: None,
                    warning: Some(format!("sample within {dist:.2e} of an eigenvalue; skipped")),
                });
            }
            let mut m = op.entries().to_owned();
            for i in 0..m.nrows() {
                m[(i, i)] -= z;
            }
            let s = linalg::min_singular_value(&m)?;
            Ok(ResolventSample { z, region, norm: Some(1.0 / s), warning: None })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::QuadratureRule;

    fn model(n_modes: usize, n_max: usize, g: f64) -> Model {
        let p = ModelParams { n_modes, n_max, g, ..Default::default() };
        Model::new(p, QuadratureRule::GaussLegendre).unwrap()
    }

    #[test]
    fn golden_rule_constant() {
        let e = fermi_golden_rule(&ModelParams::default()).unwrap();
        assert!((e + 4.0 * PI * PI * (-2.0f64).exp()).abs() < 1e-14);
        assert!((e + 5.342_822_828).abs() < 1e-8);
        let tiny = ModelParams { e1: 1e-8, ..Default::default() };
        assert!(fermi_golden_rule(&tiny).unwrap().abs() < 1e-6);
    }

    #[test]
    fn free_model_resonances_are_atomic_levels() {
        let m = model(12, 2, 0.0);
        let r = resonances(&m, 0.0, &SolverOptions::default()).unwrap();
        assert!(r.lambda0.abs() < 1e-14 && (r.lambda1 - 1.0).norm() < 1e-13);
        assert!(r.rate_coefficient.is_nan());
    }

    #[test]
    fn targeted_agrees_with_dense() {
        let m = model(30, 2, 0.1);
        let dense = resonances(&m, 0.0, &SolverOptions::default()).unwrap();
        let opts = SolverOptions { dense_limit: 0, ..Default::default() };
        let targeted = resonances(&m, 0.0, &opts).unwrap();
        assert!((dense.lambda1 - targeted.lambda1).norm() < 1e-11);
        assert!((dense.lambda0 - targeted.lambda0).abs() < 1e-11);
        assert!((dense.norm_psi0 - targeted.norm_psi0).abs() < 1e-10);
    }

    #[test]
    fn riesz_projection_matches_dyad() {
        let m = model(10, 1, 0.2);
        let h = m.hamiltonian(0.0).unwrap();
        let r = locate_resonances(&eigensolve(&h).unwrap(), &m.basis, &m.params).unwrap();
        let gap = eigensolve(&h)
            .unwrap()
            .iter()
            .map(|e| (e.value - r.lambda1).norm())
            .filter(|d| *d > 1e-9)
            .fold(f64::INFINITY, f64::min);
        let p = riesz_projection(&h, r.lambda1, gap / 4.0, 64).unwrap();
        let dyad = r.p1_theta.dense();
        let diff = crate::linalg::spectral_norm(&(p.entries() - &dyad)).unwrap();
        assert!(diff < 1e-8, "{diff}");
        let tr: C64 = (0..p.dim()).map(|i| p.get(i, i)).sum();
        assert!((tr - 1.0).norm() < 1e-8);
    }

    #[test]
    fn riesz_rejects_bad_circle() {
        let m = model(6, 1, 0.1);
        let h = m.hamiltonian(0.0).unwrap();
        assert!(riesz_projection(&h, C64::new(3.0, -0.1), 5.0, 32).is_err());
    }

    #[test]
    fn resolvent_of_free_model_is_inverse_distance() {
        let m = model(8, 1, 0.0);
        let h = m.with_params(m.params.with_theta(Theta::ZERO)).unwrap().hamiltonian(0.0).unwrap();
        let z = C64::new(1.0, 0.3);
        let out = resolvent_probe(&h, &[z], 1.0, PI / 64.0, 0.125, 1e-6).unwrap();
        let d = (0..h.dim()).map(|i| (h.get(i, i) - z).norm()).fold(f64::INFINITY, f64::min);
        assert!((out[0].norm.unwrap() - 1.0 / d).abs() < 1e-10);
        assert_eq!(out[0].region, Region::A);
    }

    #[test]
    fn rank_two_norm_matches_dense() {
        let m = model(8, 1, 0.3);
        let h = m.hamiltonian(0.0).unwrap();
        let eigs = eigensolve(&h).unwrap();
        let a = RankOneProjection::symmetric(&eigs[0].vector).unwrap();
        let b = RankOneProjection::symmetric(&eigs[3].vector).unwrap();
        let fast = rank_two_difference_norm(&a, &b).unwrap();
        let slow = crate::linalg::spectral_norm(&(a.dense() - b.dense())).unwrap();
        assert!((fast - slow).abs() < 1e-10 * slow.max(1.0));
    }
}
