use super::params::ModelParams;
use crate::error::{Error, Result};
use crate::quad::gauss_legendre;
use serde::{Deserialize, Serialize};
use std::str::FromStr;

/// How the radial momentum interval (0, k_max) is discretized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum QuadratureRule {
    GaussLegendre,
    /// Three Gauss–Legendre panels, with the middle one on [e1 - half_width, e1 + half_width]
    /// carrying `window_fraction` of the nodes.
    Refined { half_width: f64, window_fraction: f64 },
}

impl FromStr for QuadratureRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gauss-legendre" | "gauss_legendre" => Ok(Self::GaussLegendre),
            "refined" => Ok(Self::Refined { half_width: 0.25, window_fraction: 0.4 }),
            other => Err(Error::Config(format!("unknown quadrature rule '{other}'"))),
        }
    }
}

/// Quadrature nodes and weights for ∫₀^{k_max} dr.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl RadialGrid {
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.len() != weights.len() || nodes.is_empty() {
            return Err(Error::Invalid("nodes and weights must be non-empty and equally long".into()));
        }
        if !(nodes[0] > 0.0) || nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid("nodes must be positive and strictly increasing".into()));
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::Invalid("weights must be positive".into()));
        }
        Ok(Self { nodes, weights })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Recurrence time 2π/Δk of free evolution sampled on the mean node spacing.
    pub fn recurrence_time(&self) -> f64 {
        let span: f64 = self.weights.iter().sum();
        2.0 * std::f64::consts::PI * self.len() as f64 / span
    }
}

fn panel(a: f64, b: f64, n: usize, nodes: &mut Vec<f64>, weights: &mut Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    nodes.extend(x.iter().map(|x| c + h * x));
    weights.extend(w.iter().map(|w| h * w));
}

pub fn build_grid(p: &ModelParams, rule: QuadratureRule) -> Result<RadialGrid> {
    let n = p.n_modes;
    if n < 2 {
        return Err(Error::Invalid("n_modes must be at least 2".into()));
    }
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    match rule {
        QuadratureRule::GaussLegendre => panel(0.0, p.k_max, n, &mut nodes, &mut weights),
        QuadratureRule::Refined { half_width, window_fraction } => {
            let (lo, hi) = (p.e1 - half_width, p.e1 + half_width);
            if !(lo > 0.0 && hi < p.k_max && window_fraction > 0.0 && window_fraction < 1.0) {
                return Err(Error::Config("refinement window must lie inside (0, k_max)".into()));
            }
            let n_mid = ((n as f64 * window_fraction).round() as usize).max(1);
            let rest = n.saturating_sub(n_mid);
            let outer = p.k_max - 2.0 * half_width;
            let n_lo = ((rest as f64 * lo / outer).round() as usize).clamp(1, rest.saturating_sub(1).max(1));
            let n_hi = rest - n_lo;
            if n_hi == 0 {
                return Err(Error::Config("too few nodes for a refined grid".into()));
            }
            panel(0.0, lo, n_lo, &mut nodes, &mut weights);
            panel(lo, hi, n_mid, &mut nodes, &mut weights);
            panel(hi, p.k_max, n_hi, &mut nodes, &mut weights);
        }
    }
    RadialGrid::new(nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_unit_interval() {
        let p = ModelParams { n_modes: 2, k_max: 1.0, ..Default::default() };
        let g = build_grid(&p, QuadratureRule::GaussLegendre).unwrap();
        assert!((g.nodes()[0] - 0.211_324_865_405_187_1).abs() < 1e-15);
        assert!((g.nodes()[1] - 0.788_675_134_594_812_9).abs() < 1e-15);
        assert!(g.weights().iter().all(|w| (w - 0.5).abs() < 1e-15));
    }

    #[test]
    fn weights_sum_to_interval() {
        for rule in [QuadratureRule::GaussLegendre, "refined".parse().unwrap()] {
            let p = ModelParams { n_modes: 150, ..Default::default() };
            let g = build_grid(&p, rule).unwrap();
            let s: f64 = g.weights().iter().sum();
            assert!((s - p.k_max).abs() < 1e-12);
            assert_eq!(g.len(), 150);
        }
    }

    #[test]
    fn refined_grid_is_denser_near_gap() {
        let p = ModelParams { n_modes: 120, ..Default::default() };
        let g = build_grid(&p, "refined".parse().unwrap()).unwrap();
        let gap_near = |x: f64| {
            let i = g.nodes().iter().position(|&k| k > x).unwrap();
            g.nodes()[i] - g.nodes()[i - 1]
        };
        assert!(gap_near(1.0) < gap_near(3.5));
    }

    #[test]
    fn unknown_rule_rejected() {
        assert!("simpson".parse::<QuadratureRule>().is_err());
    }
}
