//! Infrared-cutoff ladder: couplings of modes below ρₙ = ρ₀ρⁿ are removed and the
//! resonance data tracked as the cutoff is lowered.
//!
//! All levels share one basis; modes below the cutoff decouple and stay in the vacuum, so the
//! level-n projections are already extended by the vacuum projection on the cut modes.

use crate::error::{Error, Result};
use crate::model::Model;
use crate::spectral::{rank_two_difference_norm, resonances, ResonanceData, SolverOptions};
use serde::Serialize;

/// Gaps below this are treated as zero when fitting exponents.
pub const GAP_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct CutoffLadder {
    pub rho0: f64,
    pub rho: f64,
    pub levels: Vec<LadderLevel>,
}

#[derive(Debug, Clone)]
pub struct LadderLevel {
    pub n: usize,
    pub cutoff: f64,
    pub data: ResonanceData,
}

/// ρₙ = ρ₀ρⁿ for n = 0..=depth.
pub fn cutoffs(rho0: f64, rho: f64, depth: usize) -> Vec<f64> {
    (0..=depth).map(|n| rho0 * rho.powi(n as i32)).collect()
}

pub fn build_ladder(model: &Model, rho0: f64, rho: f64, depth: usize, opts: &SolverOptions) -> Result<CutoffLadder> {
    let e1 = model.params.e1;
    if !(rho0 > 0.0 && rho0 < 1.0) {
        return Err(Error::Invalid(format!("rho0 = {rho0} must lie in (0, 1)")));
    }
    if !(rho > 0.0 && rho <= e1 / 4.0) {
        return Err(Error::Invalid(format!("rho = {rho} must lie in (0, e1/4]")));
    }
    let min_node = model.grid.nodes().iter().copied().fold(f64::INFINITY, f64::min);
    let cuts = cutoffs(rho0, rho, depth);
    if cuts[depth] < min_node {
        return Err(Error::Invalid(format!(
            "deepest cutoff {:.3e} lies below the smallest grid node {min_node:.3e}",
            cuts[depth]
        )));
    }
    let levels = cuts
        .into_iter()
        .enumerate()
        .map(|(n, cutoff)| Ok(LadderLevel { n, cutoff, data: resonances(model, cutoff, opts)? }))
        .collect::<Result<Vec<_>>>()?;
    Ok(CutoffLadder { rho0, rho, levels })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LadderRow {
    pub n: usize,
    pub rho_n: f64,
    pub gap0: f64,
    pub gap1: f64,
    pub proj_gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<LadderRow>,
    pub exponent_gap0: f64,
    pub exponent_gap1: f64,
    pub exponent_proj: f64,
}

/// Least-squares slope of log y against log x over points with y above [`GAP_FLOOR`].
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(_, &y)| y > GAP_FLOOR)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::Fit(format!("{} usable ladder levels, need at least 3", pts.len())));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

pub fn convergence_rows(ladder: &CutoffLadder, reference: &ResonanceData) -> Result<Vec<LadderRow>> {
    ladder
        .levels
        .iter()
        .map(|l| {
            Ok(LadderRow {
                n: l.n,
                rho_n: l.cutoff,
                gap0: (reference.lambda0 - l.data.lambda0).abs(),
                gap1: (reference.lambda1 - l.data.lambda1).norm(),
                proj_gap: rank_two_difference_norm(&reference.p1_theta, &l.data.p1_theta)?,
            })
        })
        .collect()
}

pub fn convergence_report(ladder: &CutoffLadder, reference: &ResonanceData) -> Result<ConvergenceReport> {
    let rows = convergence_rows(ladder, reference)?;
    let rho: Vec<f64> = rows.iter().map(|r| r.rho_n).collect();
    let col = |f: fn(&LadderRow) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    Ok(ConvergenceReport {
        exponent_gap0: log_log_slope(&rho, &col(|r| r.gap0))?,
        exponent_gap1: log_log_slope(&rho, &col(|r| r.gap1))?,
        exponent_proj: log_log_slope(&rho, &col(|r| r.proj_gap))?,
        rows,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GapRatioRow {
    pub n: usize,
    pub gap0: Option<f64>,
    pub gap1: Option<f64>,
    pub proj_gap: Option<f64>,
}

/// Per-level ratio of gaps at coupling 2g to gaps at g; `None` where either gap is below the floor.
pub fn gap_ratios(at_g: &[LadderRow], at_2g: &[LadderRow]) -> Vec<GapRatioRow> {
    let ratio = |a: f64, b: f64| (a > GAP_FLOOR && b > GAP_FLOOR).then(|| b / a);
    at_g.iter()
        .zip(at_2g)
        .map(|(a, b)| GapRatioRow {
            n: a.n,
            gap0: ratio(a.gap0, b.gap0),
            gap1: ratio(a.gap1, b.gap1),
            proj_gap: ratio(a.proj_gap, b.proj_gap),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelParams, QuadratureRule};

    fn model(g: f64) -> Model {
        let p = ModelParams { g, n_modes: 40, n_max: 1, ..Default::default() };
        Model::new(p, QuadratureRule::GaussLegendre).unwrap()
    }

    #[test]
    fn cutoff_arithmetic() {
        assert!((cutoffs(0.5, 0.25, 2)[2] - 0.03125).abs() < 1e-15);
    }

    #[test]
    fn free_ladder_is_flat() {
        let m = model(0.0);
        let l = build_ladder(&m, 0.5, 0.2, 2, &SolverOptions::default()).unwrap();
        for lvl in &l.levels {
            assert!(lvl.data.lambda0.abs() < 1e-12);
            assert!((lvl.data.lambda1 - m.params.e1).norm() < 1e-12);
        }
    }

    #[test]
    fn cutoff_below_grid_reproduces_reference() {
        let m = model(0.1);
        let opts = SolverOptions::default();
        let reference = resonances(&m, 0.0, &opts).unwrap();
        let min_node = m.grid.nodes()[0];
        let l = build_ladder(&m, 0.9 * min_node, 0.2, 0, &opts);
        assert!(l.is_err());
        let cut = resonances(&m, 0.5 * min_node, &opts).unwrap();
        assert_eq!(cut.lambda0, reference.lambda0);
        assert!((cut.lambda1 - reference.lambda1).norm() < 1e-14);
    }

    #[test]
    fn too_few_levels_is_a_fit_error() {
        assert!(log_log_slope(&[1.0, 0.5], &[1.0, 0.1]).is_err());
    }
}
