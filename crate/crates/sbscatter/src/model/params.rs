use crate::error::{Error, Result};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Complex dilation parameter; `Theta::ZERO` is the self-adjoint model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theta(pub C64);

impl Theta {
    pub const ZERO: Theta = Theta(C64::new(0.0, 0.0));

    pub fn imaginary(angle: f64) -> Self {
        Theta(C64::new(0.0, angle))
    }

    pub fn is_zero(self) -> bool {
        self.0 == C64::new(0.0, 0.0)
    }

    /// θ̄, the parameter whose dilated operator is the complex conjugate of this one.
    pub fn conj(self) -> Self {
        Theta(self.0.conj())
    }

    /// e^{-θ}, the dispersion rotation.
    pub fn rotation(self) -> C64 {
        (-self.0).exp()
    }
}

impl Default for Theta {
    fn default() -> Self {
        Theta::imaginary(PI / 32.0)
    }
}

/// Physical and discretization parameters of one truncated model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Excited atomic level; the ground level sits at 0.
    pub e1: f64,
    /// Ultraviolet scale of the form factor.
    pub lambda_uv: f64,
    /// Infrared regularity exponent, in (0, 1/2).
    pub mu: f64,
    pub g: f64,
    pub theta: Theta,
    pub k_max: f64,
    pub n_modes: usize,
    /// Largest total boson number kept in the Fock space.
    pub n_max: usize,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            e1: 1.0,
            lambda_uv: 1.0,
            mu: 0.25,
            g: 0.05,
            theta: Theta::default(),
            k_max: 6.0,
            n_modes: 300,
            n_max: 1,
        }
    }
}

/// Largest admissible value of the Gaussian factor e^{-k_max²/Λ²}.
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

impl ModelParams {
    pub fn with_g(&self, g: f64) -> Self {
        Self { g, ..self.clone() }
    }

    pub fn with_theta(&self, theta: Theta) -> Self {
        Self { theta, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_with(DEFAULT_TAIL_TOL)
    }

    pub fn validate_with(&self, tail_tol: f64) -> Result<()> {
        let bad = |m: &str| Err(Error::Invalid(m.to_string()));
        if !(self.e1 > 0.0 && self.e1.is_finite()) {
            return bad("e1 must be positive");
        }
        if !(self.lambda_uv > 0.0) {
            return bad("lambda_uv must be positive");
        }
        if !(self.mu > 0.0 && self.mu < 0.5) {
            return bad("mu must lie in (0, 1/2)");
        }
        if !(self.g >= 0.0 && self.g.is_finite()) {
            return bad("g must be non-negative");
        }
        if !self.theta.is_zero() {
            let t = self.theta.0;
            if !(t.re.abs() < 1e-3) {
                return bad("Re theta must lie in (-1e-3, 1e-3)");
            }
            if !(t.im > 0.0 && t.im < PI / 16.0) {
                return bad("Im theta must lie in (0, pi/16)");
            }
        }
        if self.n_modes < 2 {
            return bad("n_modes must be at least 2");
        }
        if !(self.k_max > self.e1) {
            return bad("k_max must exceed e1");
        }
        if (-(self.k_max / self.lambda_uv).powi(2)).exp() > tail_tol {
            return bad("k_max too small: form-factor tail exceeds tolerance");
        }
        Ok(())
    }
}
