use super::params::{ModelParams, Theta};
use crate::error::{Error, Result};
use num_complex::Complex64 as C64;

fn check_momentum(k: f64) -> Result<()> {
    if k > 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("momentum must be positive, got {k}")))
    }
}

/// f(k) = e^{-k²/Λ²} k^{-1/2+μ}.
pub fn form_factor(p: &ModelParams, k: f64) -> Result<f64> {
    check_momentum(k)?;
    Ok(form_factor_unchecked(p, k))
}

pub(crate) fn form_factor_unchecked(p: &ModelParams, k: f64) -> f64 {
    (-(k / p.lambda_uv).powi(2)).exp() * k.powf(p.mu - 0.5)
}

/// f evaluated at the dilated momentum e^{-θ}k, times the Jacobian e^{-3θ/2}:
/// f^θ(k) = e^{-θ(1+μ)} e^{-e^{-2θ}k²/Λ²} k^{-1/2+μ}.
pub fn dilated_form_factor(p: &ModelParams, theta: Theta, k: f64) -> Result<C64> {
    check_momentum(k)?;
    Ok(dilated_form_factor_unchecked(p, theta, k))
}

pub(crate) fn dilated_form_factor_unchecked(p: &ModelParams, theta: Theta, k: f64) -> C64 {
    if theta.is_zero() {
        return C64::new(form_factor_unchecked(p, k), 0.0);
    }
    let t = theta.0;
    let gauss = -(-2.0 * t).exp() * (k / p.lambda_uv).powi(2);
    (-t * (1.0 + p.mu) + gauss).exp() * k.powf(p.mu - 0.5)
}

/// ω^θ(k) = e^{-θ} k.
pub fn dilated_dispersion(theta: Theta, k: f64) -> Result<C64> {
    check_momentum(k)?;
    Ok(theta.rotation() * k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn p() -> ModelParams {
        ModelParams::default()
    }

    #[test]
    fn form_factor_values() {
        assert!((form_factor(&p(), 1.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        let v = form_factor(&p(), 4.0).unwrap();
        assert!((v - (-16.0f64).exp() * 4f64.powf(-0.25)).abs() < 1e-22);
        assert!((v - 7.96e-8).abs() < 5e-10);
        assert!(form_factor(&p(), 0.0).is_err());
        assert!(form_factor(&p(), -1.0).is_err());
    }

    #[test]
    fn dispersion_values() {
        let w = dilated_dispersion(Theta::imaginary(PI / 32.0), 2.0).unwrap();
        assert!((w.re - 1.990_369_453_344_393_8).abs() < 1e-12);
        assert!((w.im + 0.196_034_280_659_121_2).abs() < 1e-12);
        assert_eq!(dilated_dispersion(Theta::ZERO, 2.0).unwrap(), C64::new(2.0, 0.0));
    }

    #[test]
    fn dilated_form_factor_values() {
        let th = Theta::imaginary(PI / 32.0);
        let v = dilated_form_factor(&p(), th, 1.0).unwrap();
        let expect = C64::new(0.0, -5.0 * PI / 128.0).exp() * (-C64::new(0.0, -PI / 16.0).exp()).exp();
        assert!((v - expect).norm() < 1e-15);
        let z = dilated_form_factor(&p(), Theta::ZERO, 2.0).unwrap();
        assert_eq!(z, C64::new(form_factor(&p(), 2.0).unwrap(), 0.0));
    }

    #[test]
    fn dilation_is_analytic_continuation() {
        // f^θ(k) = e^{-3θ/2} f(e^{-θ} k) with f continued off the real axis.
        let th = Theta::imaginary(0.13);
        let pp = p();
        for k in [0.3, 1.0, 2.7] {
            let z = th.rotation() * k;
            let cont = (-(z / pp.lambda_uv).powi(2)).exp() * z.powf(pp.mu - 0.5) * (-1.5 * th.0).exp();
            assert!((dilated_form_factor(&pp, th, k).unwrap() - cont).norm() < 1e-14);
        }
    }
}
