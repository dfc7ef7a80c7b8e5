//! Experiment configuration: a TOML document with one table per study, every tolerance
//! included. Unknown keys are rejected and physical parameters re-validated on load.

use crate::error::{Error, Result};
use crate::model::{ModelParams, QuadratureRule, Theta};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub e1: f64,
    pub lambda_uv: f64,
    pub mu: f64,
    pub g: f64,
    pub theta_re: f64,
    pub theta_im: f64,
    pub k_max: f64,
    pub n_modes: usize,
    pub n_max: usize,
    /// "gauss-legendre" or "refined".
    pub quadrature: String,
    pub refine_half_width: f64,
    pub refine_fraction: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        let p = ModelParams::default();
        Self {
            e1: p.e1,
            lambda_uv: p.lambda_uv,
            mu: p.mu,
            g: p.g,
            theta_re: 0.0,
            theta_im: PI / 32.0,
            k_max: p.k_max,
            n_modes: p.n_modes,
            n_max: p.n_max,
            quadrature: "gauss-legendre".into(),
            refine_half_width: 0.25,
            refine_fraction: 0.4,
        }
    }
}

impl ModelSection {
    pub fn params(&self) -> ModelParams {
        ModelParams {
            e1: self.e1,
            lambda_uv: self.lambda_uv,
            mu: self.mu,
            g: self.g,
            theta: Theta(num_complex::Complex64::new(self.theta_re, self.theta_im)),
            k_max: self.k_max,
            n_modes: self.n_modes,
            n_max: self.n_max,
        }
    }

    pub fn rule(&self) -> Result<QuadratureRule> {
        match self.quadrature.parse()? {
            QuadratureRule::Refined { .. } => Ok(QuadratureRule::Refined {
                half_width: self.refine_half_width,
                window_fraction: self.refine_fraction,
            }),
            other => Ok(other),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub dense_limit: usize,
    pub krylov_dim: usize,
    pub residual_tol: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let o = crate::spectral::SolverOptions::default();
        Self { dense_limit: o.dense_limit, krylov_dim: o.krylov_dim, residual_tol: o.residual_tol }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResonanceSection {
    pub g_list: Vec<f64>,
    pub n_modes: usize,
    /// Allowed |Im λ₁/(g²E_I) - 1| at the smallest g.
    pub fgr_tol: f64,
    /// Imaginary parts of the dilations compared.
    pub theta_list: Vec<f64>,
    /// Grid sizes for the refinement comparison, coarse to fine.
    pub theta_grids: Vec<usize>,
    /// Allowed spread of λ₁ over the dilations, in units of e₁.
    pub theta_tol: f64,
}

impl Default for ResonanceSection {
    fn default() -> Self {
        Self {
            g_list: vec![0.1, 0.05, 0.02],
            n_modes: 400,
            fgr_tol: 0.15,
            theta_list: vec![PI / 32.0, PI / 24.0, PI / 20.0],
            theta_grids: vec![200, 400],
            theta_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MultiscaleSection {
    pub rho0: f64,
    pub rho: f64,
    pub depth: usize,
    pub n_modes: usize,
    /// Coupling pair for the ratio test; the second is normally twice the first.
    pub g_pair: [f64; 2],
    pub exponent_slack: f64,
    pub ratio_target: f64,
    pub ratio_tol: f64,
}

impl Default for MultiscaleSection {
    fn default() -> Self {
        Self {
            rho0: 0.5,
            rho: 0.25,
            depth: 6,
            n_modes: 400,
            g_pair: [0.02, 0.04],
            exponent_slack: 0.15,
            ratio_target: 2.0,
            ratio_tol: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScatterSection {
    pub g_list: Vec<f64>,
    pub n_modes: usize,
    pub n_max: usize,
    /// Bump half-width in units of e₁.
    pub width_factor: f64,
    pub dev_tol: f64,
    pub dev_at_g: f64,
    pub band_factor: f64,
    /// Agreement required between the three evaluations of T_P.
    pub consistency_tol: f64,
}

impl Default for ScatterSection {
    fn default() -> Self {
        Self {
            g_list: vec![0.1, 0.05, 0.02],
            n_modes: 60,
            n_max: 2,
            width_factor: 0.2,
            dev_tol: 0.35,
            dev_at_g: 0.05,
            band_factor: 2.0,
            consistency_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LineshapeSection {
    pub g: f64,
    pub n_modes: usize,
    pub kprime_lo: f64,
    pub kprime_hi: f64,
    pub n_points: usize,
    /// Points with |T|² above this fraction of the maximum enter the fit.
    pub fit_fraction: f64,
    pub center_tol: f64,
    pub fwhm_tol: f64,
}

impl Default for LineshapeSection {
    fn default() -> Self {
        Self {
            g: 0.05,
            n_modes: 300,
            kprime_lo: 0.8,
            kprime_hi: 1.2,
            n_points: 801,
            fit_fraction: 0.2,
            center_tol: 0.02,
            fwhm_tol: 0.10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LaplaceSection {
    pub n_models: usize,
    pub max_dim: usize,
    pub t_samples: Vec<f64>,
    /// Ray angle parameter; the rays descend at ν/4. Needs ν ≤ Im θ of every model.
    pub nu: f64,
    pub epsilon: f64,
    /// Contour half-length R in units of e₁.
    pub radius: f64,
    pub g_range: [f64; 2],
    pub theta_range: [f64; 2],
    pub tol: f64,
    pub margin: f64,
}

impl Default for LaplaceSection {
    fn default() -> Self {
        Self {
            n_models: 20,
            max_dim: 50,
            t_samples: vec![0.1, 1.0, 10.0],
            nu: PI / 64.0,
            epsilon: 0.05,
            radius: 2.0,
            g_range: [0.02, 0.3],
            theta_range: [PI / 32.0, PI / 20.0],
            tol: 1e-8,
            margin: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AsymptoticsSection {
    pub g: f64,
    /// Bump profile ĥ used for every check.
    pub profile_center: f64,
    pub profile_half_width: f64,
    pub identity_n_modes: usize,
    pub identity_n_max: usize,
    pub identity_t: f64,
    pub identity_panels: usize,
    pub identity_tol: f64,
    pub exact_tol: f64,
    pub pull_through_s: f64,
    pub vanish_n_modes: usize,
    pub vanish_t: Vec<f64>,
    pub decay_fraction: f64,
    pub overlap_s_lo: f64,
    pub overlap_s_hi: f64,
    pub overlap_samples: usize,
    pub overlap_bins: usize,
    /// Envelope values below this multiple of |⟨ĥ, f̂⟩| are quadrature noise.
    pub overlap_floor: f64,
    pub overlap_exponent_max: f64,
}

impl Default for AsymptoticsSection {
    fn default() -> Self {
        Self {
            g: 0.05,
            profile_center: 1.0,
            profile_half_width: 0.5,
            identity_n_modes: 12,
            identity_n_max: 2,
            identity_t: 50.0,
            identity_panels: 200,
            identity_tol: 1e-8,
            exact_tol: 1e-10,
            pull_through_s: 20.0,
            vanish_n_modes: 400,
            vanish_t: vec![0.0, 50.0, 100.0, 150.0, 200.0],
            decay_fraction: 0.1,
            overlap_s_lo: 10.0,
            overlap_s_hi: 1000.0,
            overlap_samples: 600,
            overlap_bins: 20,
            overlap_floor: 1e-13,
            overlap_exponent_max: -2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimatesSection {
    pub trials: usize,
    pub n_modes: usize,
    pub n_max: usize,
    pub tol: f64,
}

impl Default for EstimatesSection {
    fn default() -> Self {
        Self { trials: 100, n_modes: 6, n_max: 3, tol: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub model: ModelSection,
    pub solver: SolverSection,
    pub resonance: ResonanceSection,
    pub multiscale: MultiscaleSection,
    pub scatter: ScatterSection,
    pub lineshape: LineshapeSection,
    pub laplace: LaplaceSection,
    pub asymptotics: AsymptoticsSection,
    pub estimates: EstimatesSection,
}

fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

/// Set a dotted key such as `model.g` in a TOML table.
fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override '{assignment}' is not key=value")))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    let (last, parents) = path.split_last().expect("split yields at least one part");
    let mut node = table;
    for p in parents {
        let entry = node.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("'{p}' in '{key}' is not a table")))?;
    }
    node.insert(last.to_string(), parse_value(raw.trim()));
    Ok(())
}

impl ExperimentConfig {
    /// Parse TOML text, then apply `key=value` overrides.
    pub fn parse(text: &str, overrides: &[String]) -> Result<Self> {
        toml::from_str::<Self>(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg: Self = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(format!("after overrides: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, overrides)
    }

    pub fn params(&self) -> ModelParams {
        self.model.params()
    }

    pub fn solver_options(&self) -> crate::spectral::SolverOptions {
        crate::spectral::SolverOptions {
            dense_limit: self.solver.dense_limit,
            krylov_dim: self.solver.krylov_dim,
            residual_tol: self.solver.residual_tol,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.params();
        p.validate()?;
        self.model.rule()?;
        let bad = |m: String| Err(Error::Config(m));
        let positive = |name: &str, xs: &[f64]| -> Result<()> {
            if xs.is_empty() || xs.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
                return Err(Error::Config(format!("{name} must be a non-empty list of positive numbers")));
            }
            Ok(())
        };
        let g_list = &self.resonance.g_list;
        if g_list.is_empty() || g_list.iter().any(|g| !(*g >= 0.0 && g.is_finite())) {
            return bad("resonance.g_list must be a non-empty list of non-negative numbers".into());
        }
        positive("resonance.theta_list", &self.resonance.theta_list)?;
        for &th in &self.resonance.theta_list {
            p.with_theta(Theta::imaginary(th)).validate()?;
        }
        if self.resonance.theta_grids.len() < 2 {
            return bad("resonance.theta_grids needs a coarse and a fine grid".into());
        }
        positive("multiscale.g_pair", &self.multiscale.g_pair)?;
        let pair = &self.multiscale.g_pair;
        if pair.len() != 2 || (pair[1] - 2.0 * pair[0]).abs() > 1e-12 * pair[1] {
            return bad("multiscale.g_pair must be [g, 2g]".into());
        }
        positive("scatter.g_list", &self.scatter.g_list)?;
        positive("laplace.t_samples", &self.laplace.t_samples)?;
        let l = &self.laplace;
        if l.radius < 2.0 {
            return bad(format!("laplace.radius = {} must be at least 2 (units of e1)", l.radius));
        }
        if !(l.nu > 0.0 && l.nu <= l.theta_range[0] && l.theta_range[0] <= l.theta_range[1] && l.theta_range[1] < PI / 16.0) {
            return bad("laplace needs 0 < nu <= theta_range[0] <= theta_range[1] < pi/16".into());
        }
        if l.max_dim < 4 {
            return bad("laplace.max_dim must be at least 4".into());
        }
        let ls = &self.lineshape;
        if !(ls.kprime_lo > 0.0 && ls.kprime_hi > ls.kprime_lo && ls.n_points >= 3) {
            return bad("lineshape scan needs 0 < kprime_lo < kprime_hi and n_points >= 3".into());
        }
        let a = &self.asymptotics;
        if !(a.profile_half_width > 0.0 && a.profile_center - a.profile_half_width > 0.0) {
            return bad("asymptotics profile must be supported in (0, inf)".into());
        }
        if !(a.overlap_s_lo > 0.0 && a.overlap_s_hi > a.overlap_s_lo) {
            return bad("asymptotics overlap range must satisfy 0 < s_lo < s_hi".into());
        }
        if self.estimates.trials == 0 {
            return bad("estimates.trials must be positive".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let c = ExperimentConfig::parse("", &[]).unwrap();
        assert_eq!(c, ExperimentConfig::default());
        assert_eq!(c.params().n_modes, 300);
        assert!((c.params().theta.0.im - PI / 32.0).abs() < 1e-16);
    }

    #[test]
    fn mu_out_of_range_is_rejected() {
        let e = ExperimentConfig::parse("[model]\nmu = 0.7\n", &[]).unwrap_err();
        assert!(e.to_string().contains("mu must lie in (0, 1/2)"), "{e}");
    }

    #[test]
    fn unknown_key_reports_line() {
        let e = ExperimentConfig::parse("seed = 3\n[model]\nbogus = 1\n", &[]).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("bogus") && msg.contains("line 3"), "{msg}");
        assert!(ExperimentConfig::parse("", &["model.nope=1".into()]).is_err());
    }

    #[test]
    fn overrides_replace_fields() {
        let c = ExperimentConfig::parse("[model]\ng = 0.1\n", &["model.g=0.02".into(), "seed=9".into()]).unwrap();
        assert_eq!(c.model.g, 0.02);
        assert_eq!(c.seed, 9);
        let c = ExperimentConfig::parse("", &["resonance.g_list=[0.3, 0.2]".into()]).unwrap();
        assert_eq!(c.resonance.g_list, vec![0.3, 0.2]);
    }
}
