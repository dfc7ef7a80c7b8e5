use super::basis::{FockBasis, Level};
use super::form::dilated_form_factor_unchecked;
use super::grid::{build_grid, QuadratureRule, RadialGrid};
use super::params::ModelParams;
use crate::error::{Error, Result};
use faer::Mat;
use num_complex::Complex64 as C64;
use std::f64::consts::PI;
use std::sync::Arc;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Per-mode amplitudes of a radial one-boson function on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeFunction(pub Vec<C64>);

impl ModeFunction {
    /// ĥ_j = √(4π w_j) k_j h(k_j): the s-wave reduction, so that Σ|ĥ_j|² ≈ 4π∫ r²|h|² dr.
    pub fn from_radial(grid: &RadialGrid, h: impl Fn(f64) -> C64) -> Self {
        Self(
            grid.nodes()
                .iter()
                .zip(grid.weights())
                .map(|(&k, &w)| (4.0 * PI * w).sqrt() * k * h(k))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// ⟨self, other⟩, antilinear in `self`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// ‖ĥ/√ω‖ with ω the undilated dispersion.
    pub fn norm_over_sqrt_omega(&self, grid: &RadialGrid) -> f64 {
        self.0.iter().zip(grid.nodes()).map(|(a, k)| a.norm_sqr() / k).sum::<f64>().sqrt()
    }

    /// ĥ_t(k) = e^{-itω(k)} ĥ(k).
    pub fn evolved(&self, grid: &RadialGrid, t: f64) -> Self {
        Self(self.0.iter().zip(grid.nodes()).map(|(a, &k)| a * C64::new(0.0, -t * k).exp()).collect())
    }

    /// Zero the amplitudes of modes below `cutoff`.
    pub fn infrared_cut(&self, grid: &RadialGrid, cutoff: f64) -> Self {
        Self(self.0.iter().zip(grid.nodes()).map(|(&a, &k)| if k < cutoff { ZERO } else { a }).collect())
    }
}

/// Dense complex matrix on a Fock basis.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    basis: Arc<FockBasis>,
    entries: Mat<C64>,
}

impl OperatorMatrix {
    pub fn new(basis: Arc<FockBasis>, entries: Mat<C64>) -> Result<Self> {
        let n = basis.dim();
        if entries.nrows() != n || entries.ncols() != n {
            return Err(Error::Assembly(format!(
                "matrix is {}x{}, basis has dimension {n}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        Ok(Self { basis, entries })
    }

    pub fn zeros(basis: Arc<FockBasis>) -> Self {
        let n = basis.dim();
        Self { basis, entries: Mat::zeros(n, n) }
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn entries(&self) -> &Mat<C64> {
        &self.entries
    }

    pub fn into_entries(self) -> Mat<C64> {
        self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[(i, j)]
    }

    pub fn adjoint(&self) -> Self {
        Self { basis: self.basis.clone(), entries: self.entries.adjoint().to_owned() }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut m: f64 = 0.0;
        for j in 0..self.dim() {
            for i in 0..self.dim() {
                m = m.max((self.entries[(i, j)] - other.entries[(i, j)]).norm());
            }
        }
        m
    }

    /// max |A_ij - conj(A_ji)|.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut m: f64 = 0.0;
        for j in 0..self.dim() {
            for i in 0..=j {
                m = m.max((self.entries[(i, j)] - self.entries[(j, i)].conj()).norm());
            }
        }
        m
    }

    /// max |A_ij - A_ji|.
    pub fn symmetry_defect(&self) -> f64 {
        let mut m: f64 = 0.0;
        for j in 0..self.dim() {
            for i in 0..j {
                m = m.max((self.entries[(i, j)] - self.entries[(j, i)]).norm());
            }
        }
        m
    }

    /// Real part, provided every imaginary part is exactly zero.
    pub fn real_entries(&self) -> Option<Mat<f64>> {
        let n = self.dim();
        let mut out = Mat::zeros(n, n);
        for j in 0..n {
            for i in 0..n {
                let z = self.entries[(i, j)];
                if z.im != 0.0 {
                    return None;
                }
                out[(i, j)] = z.re;
            }
        }
        Some(out)
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim();
        let mut out = vec![ZERO; n];
        for (j, &vj) in v.iter().enumerate() {
            if vj == ZERO {
                continue;
            }
            let col = self.entries.col(j);
            for (o, a) in out.iter_mut().zip(col.iter()) {
                *o += a * vj;
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Self {
        Self { basis: self.basis.clone(), entries: &self.entries * &other.entries }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { basis: self.basis.clone(), entries: &self.entries - &other.entries }
    }
}

/// Grid, basis and parameters of one truncated model.
#[derive(Debug, Clone)]
pub struct Model {
    pub params: ModelParams,
    pub grid: RadialGrid,
    pub basis: Arc<FockBasis>,
}

impl Model {
    pub fn new(params: ModelParams, rule: QuadratureRule) -> Result<Self> {
        crate::linalg::ensure_workers();
        params.validate()?;
        let grid = build_grid(&params, rule)?;
        let basis = Arc::new(FockBasis::new(params.n_modes, params.n_max));
        Ok(Self { params, grid, basis })
    }

    /// Same grid and basis, different physical parameters (g, θ, e1, ...).
    pub fn with_params(&self, params: ModelParams) -> Result<Self> {
        params.validate()?;
        if params.n_modes != self.params.n_modes || params.n_max != self.params.n_max {
            return Err(Error::Assembly("grid/basis sizes differ from the shared model".into()));
        }
        Ok(Self { params, grid: self.grid.clone(), basis: self.basis.clone() })
    }

    pub fn hamiltonian(&self, ir_cutoff: f64) -> Result<OperatorMatrix> {
        assemble_hamiltonian(&self.params, &self.grid, &self.basis, ir_cutoff)
    }

    pub fn couplings(&self) -> ModeFunction {
        effective_coupling(&self.params, &self.grid)
    }
}

/// g_j = √(4π w_j) k_j f^θ(k_j) for the dilation stored in `p`.
pub fn effective_coupling(p: &ModelParams, grid: &RadialGrid) -> ModeFunction {
    ModeFunction::from_radial(grid, |k| dilated_form_factor_unchecked(p, p.theta, k))
}

/// Diagonal of K + H_f^θ.
pub fn free_diagonal(p: &ModelParams, grid: &RadialGrid, basis: &FockBasis) -> Vec<C64> {
    let rot = p.theta.rotation();
    (0..basis.dim())
        .map(|s| {
            let atom = match basis.level(s) {
                Level::Ground => 0.0,
                Level::Excited => p.e1,
            };
            let field: f64 = basis.occupation(s).iter().map(|&j| grid.nodes()[j as usize]).sum();
            C64::new(atom, 0.0) + rot * field
        })
        .collect()
}

/// Matrix of K + H_f^θ + g V^θ, with couplings of modes below `ir_cutoff` removed.
///
/// Creation and annihilation both carry the amplitude g f^θ(k_j) (the annihilator's
/// antilinearity undoes the θ̄ of V^θ), so the matrix is complex symmetric.
pub fn assemble_hamiltonian(
    p: &ModelParams,
    grid: &RadialGrid,
    basis: &Arc<FockBasis>,
    ir_cutoff: f64,
) -> Result<OperatorMatrix> {
    if grid.len() != basis.n_modes() {
        return Err(Error::Assembly(format!(
            "grid has {} nodes, basis has {} modes",
            grid.len(),
            basis.n_modes()
        )));
    }
    if !(ir_cutoff >= 0.0 && ir_cutoff <= p.k_max) {
        return Err(Error::Assembly(format!("infrared cutoff {ir_cutoff} outside [0, k_max]")));
    }
    let couplings = effective_coupling(p, grid).infrared_cut(grid, ir_cutoff);
    let mut h = OperatorMatrix::zeros(basis.clone());
    for (s, d) in free_diagonal(p, grid, basis).into_iter().enumerate() {
        h.entries[(s, s)] = d;
    }
    if p.g != 0.0 {
        for (lo, j, hi, sq) in basis.creation_steps() {
            let amp = couplings.0[j] * (p.g * sq);
            if amp == ZERO {
                continue;
            }
            for level in [Level::Ground, Level::Excited] {
                let from = 2 * lo + level as usize;
                let to = 2 * hi + level.flip() as usize;
                h.entries[(to, from)] += amp;
                h.entries[(from, to)] += amp;
            }
        }
    }
    Ok(h)
}

/// Matrix of a(ĥ) (antilinear in ĥ); its adjoint is a*(ĥ).
pub fn annihilator(basis: &Arc<FockBasis>, h: &ModeFunction) -> Result<OperatorMatrix> {
    if h.len() != basis.n_modes() {
        return Err(Error::Assembly("profile length differs from mode count".into()));
    }
    let mut a = OperatorMatrix::zeros(basis.clone());
    for (lo, j, hi, sq) in basis.creation_steps() {
        let amp = h.0[j].conj() * sq;
        for level in [0, 1] {
            a.entries[(2 * lo + level, 2 * hi + level)] += amp;
        }
    }
    Ok(a)
}

/// a(ĥ) for the radial profile `profile`, reduced onto the grid.
pub fn apply_annihilator(
    basis: &Arc<FockBasis>,
    grid: &RadialGrid,
    profile: impl Fn(f64) -> C64,
) -> Result<OperatorMatrix> {
    annihilator(basis, &ModeFunction::from_radial(grid, profile))
}

/// σ₁ ⊗ 1.
pub fn sigma1(basis: &Arc<FockBasis>) -> OperatorMatrix {
    let mut s = OperatorMatrix::zeros(basis.clone());
    for i in 0..basis.dim() {
        s.entries[(i ^ 1, i)] = C64::new(1.0, 0.0);
    }
    s
}

/// Diagonal of the undilated free field energy H_f.
pub fn field_energy(grid: &RadialGrid, basis: &FockBasis) -> Vec<f64> {
    (0..basis.dim())
        .map(|s| basis.occupation(s).iter().map(|&j| grid.nodes()[j as usize]).sum())
        .collect()
}

/// Projection onto states with fewer than n_max bosons.
pub fn interior_mask(basis: &FockBasis) -> Vec<bool> {
    (0..basis.dim()).map(|s| basis.boson_number(s) < basis.n_max()).collect()
}

/// Snapshot of an assembled operator: parameters, grid, basis descriptor and row-major entries.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct OperatorSnapshot {
    pub params: ModelParams,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub n_modes: usize,
    pub n_max: usize,
    pub dim: usize,
    /// Row-major (re, im) pairs.
    pub entries: Vec<[f64; 2]>,
}

impl OperatorSnapshot {
    pub fn capture(model: &Model, op: &OperatorMatrix) -> Self {
        let n = op.dim();
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let z = op.get(i, j);
                entries.push([z.re, z.im]);
            }
        }
        Self {
            params: model.params.clone(),
            nodes: model.grid.nodes().to_vec(),
            weights: model.grid.weights().to_vec(),
            n_modes: model.basis.n_modes(),
            n_max: model.basis.n_max(),
            dim: n,
            entries,
        }
    }

    pub fn restore(&self) -> Result<(Model, OperatorMatrix)> {
        let grid = RadialGrid::new(self.nodes.clone(), self.weights.clone())?;
        let basis = Arc::new(FockBasis::new(self.n_modes, self.n_max));
        if basis.dim() != self.dim || self.entries.len() != self.dim * self.dim {
            return Err(Error::Assembly("snapshot dimensions are inconsistent".into()));
        }
        let m = Mat::from_fn(self.dim, self.dim, |i, j| {
            let [re, im] = self.entries[i * self.dim + j];
            C64::new(re, im)
        });
        let model = Model { params: self.params.clone(), grid, basis: basis.clone() };
        Ok((model, OperatorMatrix::new(basis, m)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Theta;
    use crate::quad::{integrate_real, Tolerance};

    fn small(n_modes: usize, n_max: usize, g: f64, theta: Theta) -> Model {
        let p = ModelParams { n_modes, n_max, g, theta, ..Default::default() };
        Model::new(p, QuadratureRule::GaussLegendre).unwrap()
    }

    #[test]
    fn coupling_norm_matches_continuum() {
        let m = small(300, 1, 0.05, Theta::ZERO);
        let s: f64 = m.couplings().0.iter().map(|c| c.norm_sqr()).sum();
        let p = &m.params;
        let oracle = 4.0 * PI * integrate_real(|r| r * r * super::super::form::form_factor_unchecked(p, r).powi(2), &[0.0, 1.0, 6.0], Tolerance::default());
        assert!((s - oracle).abs() < 1e-6 * oracle, "{s} vs {oracle}");
        assert!(m.couplings().0.iter().all(|c| c.im == 0.0 && c.re > 0.0));
    }

    #[test]
    fn hermitian_at_zero_theta_symmetric_otherwise() {
        let h = small(20, 2, 0.3, Theta::ZERO).hamiltonian(0.0).unwrap();
        assert!(h.hermiticity_defect() < 1e-13);
        let h = small(20, 2, 0.3, Theta::default()).hamiltonian(0.0).unwrap();
        assert!(h.symmetry_defect() == 0.0);
        assert!(h.hermiticity_defect() > 1e-6);
    }

    #[test]
    fn full_cutoff_equals_free() {
        let m = small(15, 2, 0.2, Theta::default());
        let cut = m.hamiltonian(m.params.k_max).unwrap();
        let free = m.with_params(m.params.with_g(0.0)).unwrap().hamiltonian(0.0).unwrap();
        assert_eq!(cut.max_abs_diff(&free), 0.0);
    }

    #[test]
    fn annihilator_kills_vacuum_and_obeys_ccr_inside() {
        let m = small(6, 3, 0.0, Theta::ZERO);
        let h = ModeFunction::from_radial(&m.grid, |r| C64::new((-r).exp(), 0.3 * r));
        let l = ModeFunction::from_radial(&m.grid, |r| C64::new(r.sin(), 0.0));
        let a_h = annihilator(&m.basis, &h).unwrap();
        let a_l = annihilator(&m.basis, &l).unwrap();
        for lev in [Level::Ground, Level::Excited] {
            let mut v = vec![ZERO; m.basis.dim()];
            v[m.basis.vacuum(lev)] = C64::new(1.0, 0.0);
            assert!(a_h.apply(&v).iter().all(|z| z.norm() == 0.0));
        }
        let comm = a_h.matmul(&a_l.adjoint()).sub(&a_l.adjoint().matmul(&a_h));
        let hl = h.inner(&l);
        let interior = interior_mask(&m.basis);
        for i in 0..m.basis.dim() {
            for j in 0..m.basis.dim() {
                if !interior[i] || !interior[j] {
                    continue;
                }
                let expect = if i == j { hl } else { ZERO };
                assert!((comm.get(i, j) - expect).norm() < 1e-13 * hl.norm().max(1.0));
            }
        }
    }

    #[test]
    fn snapshot_round_trip() {
        let m = small(5, 1, 0.1, Theta::default());
        let h = m.hamiltonian(0.0).unwrap();
        let snap = OperatorSnapshot::capture(&m, &h);
        let text = serde_json::to_string(&snap).unwrap();
        let back: OperatorSnapshot = serde_json::from_str(&text).unwrap();
        let (m2, h2) = back.restore().unwrap();
        assert_eq!(h.max_abs_diff(&h2), 0.0);
        assert_eq!(m2.grid, m.grid);
    }
}
