//! One-photon transition amplitude: the closed-form principal term, its momentum kernel
//! and lineshape, and an independent oracle built from the self-adjoint spectrum.

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;
use crate::model::{form_factor_unchecked, FockBasis, Model, ModelParams, Theta};
use crate::quad::{integrate, Tolerance};
use crate::spectral::{GroundState, ResonanceData};
use faer::Mat;
use num_complex::Complex64 as C64;
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::Arc;

const I: C64 = C64::new(0.0, 1.0);

pub type RadialFn = Arc<dyn Fn(f64) -> C64 + Send + Sync>;

/// Smooth compactly supported bump exp(1 + 1/(x² - 1)), x = (r - center)/half_width; peak value 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bump {
    pub center: f64,
    pub half_width: f64,
}

impl Bump {
    pub fn eval(&self, r: f64) -> f64 {
        let x = (r - self.center) / self.half_width;
        if x.abs() >= 1.0 {
            0.0
        } else {
            (1.0 + 1.0 / (x * x - 1.0)).exp()
        }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.center - self.half_width, self.center + self.half_width)
    }
}

/// Angular-integrated radial profiles of the outgoing (h) and incoming (l) photon.
#[derive(Clone)]
pub struct PhotonProfile {
    pub radial_h: RadialFn,
    pub radial_l: RadialFn,
    pub support: (f64, f64),
}

impl std::fmt::Debug for PhotonProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PhotonProfile").field("support", &self.support).finish_non_exhaustive()
    }
}

impl PhotonProfile {
    /// h = l = the given bump.
    pub fn bump(b: Bump) -> Self {
        let f: RadialFn = Arc::new(move |r| C64::new(b.eval(r), 0.0));
        Self { radial_h: f.clone(), radial_l: f, support: b.support() }
    }

    /// Bump of half-width `width_factor`·e₁ centred at Re λ₁ - λ₀.
    pub fn resonance_centered(res: &ResonanceData, p: &ModelParams, width_factor: f64) -> Self {
        Self::bump(Bump { center: res.lambda1.re - res.lambda0, half_width: width_factor * p.e1 })
    }
}

/// G(r) = r⁴ conj(h(r)) l(r) f(r)², zero for r outside the support.
#[derive(Clone, Debug)]
pub struct PairingFunction {
    profile: PhotonProfile,
    params: ModelParams,
}

impl PairingFunction {
    pub fn eval(&self, r: f64) -> C64 {
        let (a, b) = self.profile.support;
        if r <= a || r >= b {
            return C64::new(0.0, 0.0);
        }
        let f = form_factor_unchecked(&self.params, r);
        r.powi(4) * (self.profile.radial_h)(r).conj() * (self.profile.radial_l)(r) * f * f
    }

    pub fn support(&self) -> (f64, f64) {
        self.profile.support
    }

    pub fn profile(&self) -> &PhotonProfile {
        &self.profile
    }

    pub fn samples(&self, n: usize) -> Vec<(f64, C64)> {
        let (a, b) = self.support();
        (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).map(|r| (r, self.eval(r))).collect()
    }
}

pub fn build_g(profile: &PhotonProfile, params: &ModelParams) -> Result<PairingFunction> {
    let (a, b) = profile.support;
    if !(a > 0.0) {
        return Err(Error::Domain("profile support must stay away from r = 0".into()));
    }
    if !(b > a && b < params.k_max) {
        return Err(Error::Domain(format!("profile support ({a}, {b}) must lie inside (0, k_max)")));
    }
    Ok(PairingFunction { profile: profile.clone(), params: params.clone() })
}

fn tol() -> Tolerance {
    Tolerance { abs: 1e-15, rel: 1e-12, max_panels: 50_000 }
}

/// Breakpoints of the support with extra points around a near-pole at `x` of width `w`.
fn breakpoints(a: f64, b: f64, x: f64, w: f64) -> Vec<f64> {
    let mut pts = vec![a, b];
    for s in [-10.0, -1.0, 0.0, 1.0, 10.0] {
        let p = x + s * w;
        if p > a && p < b {
            pts.push(p);
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

fn check_resonance(res: &ResonanceData) -> Result<()> {
    if !(res.lambda1.im < 0.0) {
        return Err(Error::Invalid(format!("resonance must have Im λ₁ < 0, got {}", res.lambda1.im)));
    }
    Ok(())
}

/// M = 4πi (Re λ₁ - λ₀) E₁⁻¹ ‖Ψ_{λ₀}‖⁻².
pub fn prefactor_m(res: &ResonanceData) -> Result<C64> {
    check_resonance(res)?;
    Ok(4.0 * PI * I * (res.lambda1.re - res.lambda0) / (res.rate_coefficient * res.norm_psi0.powi(2)))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PrincipalTerm {
    pub t_p: C64,
    /// The same amplitude evaluated through M and the E₁g² numerator.
    pub t_p_via_m: C64,
    pub m: C64,
}

/// T_P = 4πi g² ‖Ψ_{λ₀}‖⁻² ∫ G(r) (Re λ₁ - λ₀) / [(r + λ₀ - λ₁)(r - λ₀ + conj λ₁)] dr.
pub fn principal_term(g: &PairingFunction, res: &ResonanceData) -> Result<PrincipalTerm> {
    check_resonance(res)?;
    let (l0, l1, gc) = (res.lambda0, res.lambda1, res.g);
    let (a, b) = g.support();
    let pts = breakpoints(a, b, l1.re - l0, -l1.im);
    let first = integrate(
        |r| g.eval(r) * (l1.re - l0) / ((r + l0 - l1) * (r - l0 + l1.conj())),
        &pts,
        tol(),
    )
    .value;
    let t_p = 4.0 * PI * I * gc * gc / res.norm_psi0.powi(2) * first;
    let m = prefactor_m(res)?;
    let e1g2 = res.rate_coefficient * gc * gc;
    let second = integrate(
        |r| g.eval(r) * e1g2 / ((r + l0 - l1.re - I * e1g2) * (r - l0 + l1.conj())),
        &pts,
        tol(),
    )
    .value;
    Ok(PrincipalTerm { t_p, t_p_via_m: m * second, m })
}

/// T_P(k, k') = M f(k) f(k') E₁g² / [(k' + λ₀ - Re λ₁ - i g²E₁)(k' - λ₀ + conj λ₁)].
pub fn kernel(res: &ResonanceData, p: &ModelParams, k: f64, kprime: f64) -> Result<C64> {
    if !(k > 0.0 && kprime > 0.0) {
        return Err(Error::Domain("kernel momenta must be positive".into()));
    }
    let m = prefactor_m(res)?;
    let e1g2 = res.rate_coefficient * res.g * res.g;
    let (l0, l1) = (res.lambda0, res.lambda1);
    let ff = form_factor_unchecked(p, k) * form_factor_unchecked(p, kprime);
    Ok(m * ff * e1g2 / ((kprime + l0 - l1.re - I * e1g2) * (kprime - l0 + l1.conj())))
}

/// ∫ r⁴ conj(h(r)) l(r) T_P(r, r) dr: the kernel integrated on shell.
pub fn principal_term_from_kernel(profile: &PhotonProfile, res: &ResonanceData, p: &ModelParams) -> Result<C64> {
    prefactor_m(res)?;
    let (a, b) = profile.support;
    let pts = breakpoints(a, b, res.lambda1.re - res.lambda0, -res.lambda1.im);
    Ok(integrate(
        |r| {
            let k = kernel(res, p, r, r).unwrap_or_default();
            r.powi(4) * (profile.radial_h)(r).conj() * (profile.radial_l)(r) * k
        },
        &pts,
        tol(),
    )
    .value)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LineshapeRow {
    pub kprime: f64,
    pub t: C64,
    pub abs2: f64,
}

/// |T_P(k, k')|² over the given k' values with |k| = |k'| (on shell).
pub fn lineshape_scan(res: &ResonanceData, p: &ModelParams, kprimes: &[f64]) -> Result<Vec<LineshapeRow>> {
    kprimes
        .iter()
        .map(|&kp| {
            let t = kernel(res, p, kp, kp)?;
            Ok(LineshapeRow { kprime: kp, t, abs2: t.norm_sqr() })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LorentzianFit {
    pub center: f64,
    pub half_width: f64,
    pub amplitude: f64,
    pub fwhm: f64,
}

/// Least-squares fit of y = A/((x - x₀)² + w²) through the linear model 1/y = a x² + b x + c.
pub fn fit_lorentzian(xs: &[f64], ys: &[f64]) -> Result<LorentzianFit> {
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).filter(|(_, y)| **y > 0.0).map(|(x, y)| (*x, 1.0 / y)).collect();
    if pts.len() < 3 {
        return Err(Error::Fit("need at least three positive samples".into()));
    }
    // Centre and scale x for conditioning; weight by y² so the fit tracks the peak.
    let mean = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
    let spread = pts.iter().map(|p| (p.0 - mean).abs()).fold(0.0, f64::max).max(1e-300);
    let n = pts.len();
    let design = Mat::from_fn(n, 3, |i, j| {
        let u = (pts[i].0 - mean) / spread;
        let w = 1.0 / pts[i].1;
        w * u.powi(2 - j as i32)
    });
    let rhs = Mat::from_fn(n, 1, |_, _| 1.0);
    use faer::linalg::solvers::SolveLstsq;
    let sol = design.qr().solve_lstsq(&rhs);
    let (a, b, c) = (sol[(0, 0)], sol[(1, 0)], sol[(2, 0)]);
    if !(a > 0.0) {
        return Err(Error::Fit("reciprocal data is not convex; no Lorentzian peak".into()));
    }
    let u0 = -b / (2.0 * a);
    let w2 = c / a - u0 * u0;
    if !(w2 > 0.0) {
        return Err(Error::Fit("fitted width is not real".into()));
    }
    let center = mean + spread * u0;
    let half_width = spread * w2.sqrt();
    let amplitude = spread * spread / a;
    Ok(LorentzianFit { center, half_width, amplitude, fwhm: 2.0 * half_width })
}

/// P∫ G(r)/(r - x) dr over the support [a, b] of G, by singularity subtraction when x ∈ (a, b).
pub fn principal_value(g: impl Fn(f64) -> C64, a: f64, b: f64, x: f64) -> Result<C64> {
    let eps = 4.0 * f64::EPSILON * a.abs().max(b.abs()).max(1.0);
    if (x - a).abs() < eps || (x - b).abs() < eps {
        return Err(Error::Domain(format!("principal value point {x} sits on an endpoint")));
    }
    if x <= a || x >= b {
        return Ok(integrate(|r| g(r) / (r - x), &[a, b], tol()).value);
    }
    let gx = g(x);
    let smooth = integrate(|r| (g(r) - gx) / (r - x), &[a, x, b], tol()).value;
    Ok(smooth + gx * ((b - x) / (x - a)).abs().ln())
}

/// Spectrum of the self-adjoint model.
pub struct SelfAdjointSpectrum {
    pub energies: Vec<f64>,
    pub vectors: Mat<f64>,
}

impl SelfAdjointSpectrum {
    pub fn solve(model: &Model) -> Result<Self> {
        let flat = model.with_params(model.params.with_theta(Theta::ZERO))?;
        let h = flat.hamiltonian(0.0)?;
        let real = h.real_entries().ok_or_else(|| Error::Solver("θ = 0 matrix is not real".into()))?;
        let (energies, vectors) = symmetric_eigen(&real)?;
        Ok(Self { energies, vectors })
    }

    pub fn ground(&self, basis: &FockBasis) -> GroundState {
        GroundState::from_symmetric_eigen(&self.energies, &self.vectors, basis)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct OracleTransition {
    pub t: C64,
    pub first: C64,
    pub second: C64,
    pub lambda0: f64,
    pub norm_psi0: f64,
    pub modes_used: usize,
}

/// T = 2πg²‖Ψ_{λ₀}‖⁻² (T⁽¹⁾ - T⁽²⁾) from the self-adjoint eigenbasis, with
/// c_m = ⟨v_m, σ₁Ψ_{λ₀}⟩ and x_m = E_m - λ₀:
/// T⁽¹⁾ = Σ|c_m|² i ∫ G/(r - x_m + i0), T⁽²⁾ = Σ|c_m|² i ∫ G/(r + x_m).
pub fn oracle_from_spectrum(g: &PairingFunction, spec: &SelfAdjointSpectrum, basis: &FockBasis, coupling: f64) -> Result<OracleTransition> {
    let gs = spec.ground(basis);
    let psi0 = gs.psi0(basis);
    let nrm2 = gs.norm_psi0(basis).powi(2);
    let n = basis.dim();
    let flipped: Vec<f64> = (0..n).map(|i| psi0[i ^ 1]).collect();
    let weights: Vec<f64> = (0..n)
        .map(|m| {
            let c: f64 = spec.vectors.col(m).iter().zip(&flipped).map(|(v, s)| v * s).sum();
            c * c
        })
        .collect();
    let total: f64 = weights.iter().sum();
    let (a, b) = g.support();
    let mut first = C64::new(0.0, 0.0);
    let mut second = C64::new(0.0, 0.0);
    let mut used = 0;
    for (m, &w) in weights.iter().enumerate() {
        if w <= 1e-30 * total.max(1e-300) {
            continue;
        }
        used += 1;
        let x = spec.energies[m] - gs.energy;
        let pole = if x > a && x < b {
            principal_value(|r| g.eval(r), a, b, x)? - I * PI * g.eval(x)
        } else {
            integrate(|r| g.eval(r) / (r - x), &[a, b], tol()).value
        };
        first += w * I * pole;
        second += w * I * integrate(|r| g.eval(r) / (r + x), &[a, b], tol()).value;
    }
    let pref = 2.0 * PI * coupling * coupling / nrm2;
    Ok(OracleTransition {
        t: pref * (first - second),
        first,
        second,
        lambda0: gs.energy,
        norm_psi0: nrm2.sqrt(),
        modes_used: used,
    })
}

pub fn oracle_transition(g: &PairingFunction, model: &Model) -> Result<OracleTransition> {
    let spec = SelfAdjointSpectrum::solve(model)?;
    oracle_from_spectrum(g, &spec, &model.basis, model.params.g)
}

#[derive(Debug, Clone, Serialize)]
pub struct TransitionResult {
    pub g: f64,
    pub lambda0: f64,
    pub lambda1: C64,
    pub m: C64,
    pub t_p: C64,
    pub t_oracle: C64,
    pub rel_dev: f64,
}
