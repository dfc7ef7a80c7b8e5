use crate::error::{Error, Result};
use crate::linalg::{vdot, HessenbergForm};
use crate::quad::{integrate, Tolerance};
use faer::Mat;
use num_complex::Complex64 as C64;
use serde::Serialize;
use std::f64::consts::PI;

/// Contour below which the dilated spectrum lies: a ray descending into the lower-left
/// half plane ending at -R, the real axis up to λ₀, a small semicircle passing above λ₀,
/// the real axis up to R, and a ray descending into the lower-right half plane.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Contour {
    pub lambda0: f64,
    pub epsilon: f64,
    pub radius: f64,
    /// Ray angle below the real axis is `nu / 4`.
    pub nu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    LeftRay { length: f64 },
    Line { from: f64, to: f64 },
    Semicircle,
    RightRay { length: f64 },
}

impl Contour {
    pub fn new(lambda0: f64, epsilon: f64, radius: f64, nu: f64) -> Result<Self> {
        if !(epsilon > 0.0 && nu > 0.0 && nu < PI) {
            return Err(Error::Contour(format!("need ε > 0 and 0 < ν < π (ε = {epsilon}, ν = {nu})")));
        }
        if !(lambda0 - epsilon > -radius && lambda0 + epsilon < radius) {
            return Err(Error::Contour(format!("semicircle around {lambda0} leaves [-{radius}, {radius}]")));
        }
        Ok(Self { lambda0, epsilon, radius, nu })
    }

    /// Ray length beyond which |e^{-itz}| < e^{-32}.
    pub fn ray_length(&self, t: f64) -> f64 {
        32.0 / (t * (self.nu / 4.0).sin())
    }

    pub fn segments(&self, t: f64) -> [Segment; 5] {
        let length = self.ray_length(t);
        [
            Segment::LeftRay { length },
            Segment::Line { from: -self.radius, to: self.lambda0 - self.epsilon },
            Segment::Semicircle,
            Segment::Line { from: self.lambda0 + self.epsilon, to: self.radius },
            Segment::RightRay { length },
        ]
    }

    /// Point and derivative at parameter `s` along `seg`, oriented left to right.
    fn point(&self, seg: Segment, s: f64) -> (C64, C64) {
        let down = C64::from_polar(1.0, -self.nu / 4.0);
        match seg {
            // Parametrized outward; the sign flip orients it inward.
            Segment::LeftRay { .. } => {
                let dir = -down.conj();
                (C64::new(-self.radius, 0.0) + dir * s, -dir)
            }
            Segment::Line { .. } => (C64::new(s, 0.0), C64::new(1.0, 0.0)),
            Segment::Semicircle => {
                let e = C64::from_polar(self.epsilon, -s);
                (C64::new(self.lambda0, 0.0) - e, C64::new(0.0, 1.0) * e)
            }
            Segment::RightRay { .. } => (C64::new(self.radius, 0.0) + down * s, down),
        }
    }

    fn range(&self, seg: Segment) -> (f64, f64) {
        match seg {
            Segment::LeftRay { length } | Segment::RightRay { length } => (0.0, length),
            Segment::Line { from, to } => (from, to),
            Segment::Semicircle => (0.0, PI),
        }
    }

    /// Height of the contour above abscissa x.
    fn height(&self, x: f64) -> f64 {
        let tan = (self.nu / 4.0).tan();
        if x < -self.radius {
            tan * (x + self.radius)
        } else if x > self.radius {
            -tan * (x - self.radius)
        } else if (x - self.lambda0).abs() < self.epsilon {
            (self.epsilon.powi(2) - (x - self.lambda0).powi(2)).sqrt()
        } else {
            0.0
        }
    }

    /// Distance from z to the contour, negative when z lies above it.
    pub fn signed_clearance(&self, z: C64) -> f64 {
        let down = C64::from_polar(1.0, -self.nu / 4.0);
        let to_ray = |origin: f64, dir: C64| {
            let rel = z - origin;
            let u = (rel.re * dir.re + rel.im * dir.im).max(0.0);
            (rel - dir * u).norm()
        };
        let to_line = |a: f64, b: f64| (z - z.re.clamp(a, b)).norm();
        let arc = {
            let rel = z - self.lambda0;
            if rel.im >= 0.0 {
                (rel.norm() - self.epsilon).abs()
            } else {
                (rel.norm_sqr() + self.epsilon.powi(2) - 2.0 * self.epsilon * rel.re.abs()).sqrt()
            }
        };
        let d = [
            to_ray(-self.radius, -down.conj()),
            to_line(-self.radius, self.lambda0 - self.epsilon),
            arc,
            to_line(self.lambda0 + self.epsilon, self.radius),
            to_ray(self.radius, down),
        ]
        .into_iter()
        .fold(f64::INFINITY, f64::min);
        if z.im < self.height(z.re) {
            d
        } else {
            -d
        }
    }

    /// First eigenvalue lying above the contour or within `margin` of it.
    pub fn obstruction(&self, spectrum: &[C64], margin: f64) -> Option<C64> {
        spectrum.iter().copied().find(|&z| self.signed_clearance(z) < margin)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ContourValue {
    pub value: C64,
    pub error: f64,
    pub evaluations: usize,
}

/// (2πi)⁻¹ ∫_Γ e^{-itz} ⟨ψ, (H - z)⁻¹ φ⟩ dz for t > 0.
///
/// `spectrum` must be the eigenvalues of `h`; the contour is rejected if any of them lies
/// within `margin` of it or above it.
pub fn laplace_matrix_element(
    h: &Mat<C64>,
    spectrum: &[C64],
    phi: &[C64],
    psi: &[C64],
    t: f64,
    contour: &Contour,
    margin: f64,
) -> Result<ContourValue> {
    if !(t > 0.0) {
        return Err(Error::Contour(format!("contour representation needs t > 0, got {t}")));
    }
    if let Some(z) = contour.obstruction(spectrum, margin) {
        return Err(Error::Contour(format!("eigenvalue {z} within {margin:e} of or above the contour")));
    }
    let tol = Tolerance { abs: 1e-15, rel: 1e-13, max_panels: 20_000 };
    let mut value = C64::new(0.0, 0.0);
    let mut error = 0.0;
    let mut evaluations = 0;
    let reduced = HessenbergForm::new(h);
    let (phi_r, psi_r) = (reduced.to_reduced(phi), reduced.to_reduced(psi));
    for seg in contour.segments(t) {
        let (a, b) = contour.range(seg);
        let est = integrate(
            |s| {
                let (z, dz) = contour.point(seg, s);
                let x = reduced.solve_reduced(z, phi_r.clone());
                (C64::new(0.0, -t) * z).exp() * vdot(&psi_r, &x) * dz
            },
            &[a, b],
            tol,
        );
        value += est.value;
        error += est.error;
        evaluations += 15 * est.panels;
    }
    let norm = C64::new(0.0, 2.0 * PI);
    Ok(ContourValue { value: value / norm, error: error / (2.0 * PI), evaluations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_resolvent_gives_phase() {
        let e = C64::new(0.7, -0.2);
        let h = Mat::from_fn(1, 1, |_, _| e);
        let c = Contour::new(0.0, 0.1, 2.0, PI / 8.0).unwrap();
        let one = [C64::new(1.0, 0.0)];
        for t in [0.3, 2.0] {
            let v = laplace_matrix_element(&h, &[e], &one, &one, t, &c, 1e-6).unwrap();
            let exact = (C64::new(0.0, -t) * e).exp();
            assert!((v.value - exact).norm() < 1e-11, "t={t}: {} vs {exact}", v.value);
        }
    }

    #[test]
    fn real_eigenvalue_under_semicircle() {
        let h = Mat::from_fn(1, 1, |_, _| C64::new(-0.4, 0.0));
        let c = Contour::new(-0.4, 0.05, 2.0, PI / 8.0).unwrap();
        let one = [C64::new(1.0, 0.0)];
        let v = laplace_matrix_element(&h, &[C64::new(-0.4, 0.0)], &one, &one, 1.0, &c, 1e-6).unwrap();
        assert!((v.value - C64::new(0.0, 0.4).exp()).norm() < 1e-11);
    }

    #[test]
    fn eigenvalue_above_contour_is_rejected() {
        let z = C64::new(0.5, 0.01);
        let c = Contour::new(0.0, 0.1, 2.0, PI / 8.0).unwrap();
        assert!(c.signed_clearance(z) < 0.0);
        let h = Mat::from_fn(1, 1, |_, _| z);
        let one = [C64::new(1.0, 0.0)];
        assert!(laplace_matrix_element(&h, &[z], &one, &one, 1.0, &c, 1e-9).is_err());
        assert!(c.signed_clearance(C64::new(3.0, -0.01)) < 0.0);
        assert!(c.signed_clearance(C64::new(3.0, -1.0)) > 0.0);
    }
}
