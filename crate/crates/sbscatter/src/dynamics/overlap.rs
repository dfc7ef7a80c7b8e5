use crate::error::{Error, Result};
use crate::model::{form_factor, ModelParams};
use crate::quad::{integrate, integrate_real, Tolerance};
use num_complex::Complex64 as C64;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct OverlapSample {
    pub s: f64,
    pub value: C64,
}

/// ⟨ĥ_{-s}, f̂⟩ = 4π ∫ r² conj(h(r)) e^{isr} f(r) dr for a profile supported in `support`.
pub fn overlap_decay(
    profile: impl Fn(f64) -> C64,
    support: (f64, f64),
    params: &ModelParams,
    s_samples: &[f64],
) -> Result<Vec<OverlapSample>> {
    let (a, b) = support;
    if !(a > 0.0 && b > a) {
        return Err(Error::Invalid(format!("profile support ({a}, {b}) must lie in (0, ∞)")));
    }
    // Oscillatory cancellation leaves roundoff near 1e-16 of the integrand's L1 mass, so the
    // absolute target is pinned just above that.
    let mass = integrate_real(|r| 4.0 * PI * r * r * profile(r).norm() * form_factor(params, r).unwrap_or(0.0), &[a, b], Tolerance::default());
    let tol = Tolerance { abs: 1e-15 * mass.max(f64::MIN_POSITIVE), rel: 1e-13, max_panels: 50_000 };
    s_samples
        .iter()
        .map(|&s| {
            let mut fail = None;
            let est = integrate(
                |r| match form_factor(params, r) {
                    Ok(fr) => 4.0 * PI * r * r * profile(r).conj() * C64::new(0.0, s * r).exp() * fr,
                    Err(e) => {
                        fail.get_or_insert(e);
                        C64::new(0.0, 0.0)
                    }
                },
                &[a, b],
                tol,
            );
            match fail {
                Some(e) => Err(e),
                None => Ok(OverlapSample { s, value: est.value }),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct EnvelopeFit {
    pub exponent: f64,
    pub bins_used: usize,
    pub floor: f64,
}

/// Log-log slope of the upper envelope of |overlap(s)| over [s_lo, s_hi], using the
/// maximum in each of `bins` logarithmic bins. Bins whose maximum sits below `floor`
/// (the quadrature noise level) are dropped.
pub fn fit_envelope_exponent(samples: &[OverlapSample], s_lo: f64, s_hi: f64, bins: usize, floor: f64) -> Result<EnvelopeFit> {
    let (l0, l1) = (s_lo.ln(), s_hi.ln());
    let width = (l1 - l0) / bins as f64;
    let mut maxima = vec![(0.0_f64, 0.0_f64); bins];
    for smp in samples.iter().filter(|x| x.s >= s_lo && x.s <= s_hi) {
        let k = (((smp.s.ln() - l0) / width) as usize).min(bins - 1);
        let v = smp.value.norm();
        if v > maxima[k].1 {
            maxima[k] = (smp.s, v);
        }
    }
    let pts: Vec<(f64, f64)> = maxima
        .into_iter()
        .filter(|&(_, v)| v > floor)
        .map(|(s, v)| (s.ln(), v.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::Fit(format!("only {} envelope bins above the floor {floor:e}", pts.len())));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(EnvelopeFit { exponent: sxy / sxx, bins_used: pts.len(), floor })
}
