use sbscatter::dynamics::finite_time_identity_check;
use sbscatter::model::{Model, ModeFunction, ModelParams, QuadratureRule, Theta};
use sbscatter::multiscale::{build_ladder, convergence_rows, GAP_FLOOR};
use sbscatter::scattering::{build_g, principal_term, Bump, PhotonProfile};
use sbscatter::spectral::{fermi_golden_rule, resonances, SolverOptions};
use sbscatter::C64;

fn model(g: f64, n_modes: usize, n_max: usize) -> Model {
    Model::new(ModelParams { g, n_modes, n_max, ..Default::default() }, QuadratureRule::GaussLegendre).unwrap()
}

#[test]
fn resonances_approach_atomic_levels_linearly_or_faster() {
    let opts = SolverOptions::default();
    let mut prev: Option<(f64, f64)> = None;
    for g in [0.1, 0.05, 0.025, 0.0125] {
        let r = resonances(&model(g, 200, 1), 0.0, &opts).unwrap();
        let dist = r.lambda0.abs().max((r.lambda1 - 1.0).norm());
        assert!(dist <= 2.0 * g, "g = {g}: distance {dist}");
        if let Some((pg, pd)) = prev {
            assert!(dist < pd * (g / pg) * 1.05, "distance does not shrink with g");
        }
        prev = Some((g, dist));
    }
}

#[test]
fn rate_coefficient_tends_to_golden_rule() {
    let opts = SolverOptions::default();
    let e_i = fermi_golden_rule(&ModelParams::default()).unwrap();
    let devs: Vec<f64> = [0.1, 0.05, 0.02]
        .iter()
        .map(|&g| {
            let r = resonances(&model(g, 300, 1), 0.0, &opts).unwrap();
            assert!(r.rate_coefficient < 0.0);
            (r.rate_coefficient / e_i - 1.0).abs()
        })
        .collect();
    assert!(devs.windows(2).all(|w| w[1] < w[0]), "{devs:?}");
    assert!(devs[2] < 0.01);
}

#[test]
fn off_resonance_profile_is_suppressed() {
    let opts = SolverOptions::default();
    let ratios: Vec<f64> = [0.1, 0.05, 0.02]
        .iter()
        .map(|&g| {
            let m = model(g, 30, 2);
            let res = resonances(&m, 0.0, &opts).unwrap();
            let centered = PhotonProfile::resonance_centered(&res, &m.params, 0.2);
            let away = PhotonProfile::bump(Bump { center: 2.5, half_width: 0.3 });
            let tc = principal_term(&build_g(&centered, &m.params).unwrap(), &res).unwrap().t_p;
            let ta = principal_term(&build_g(&away, &m.params).unwrap(), &res).unwrap().t_p;
            ta.norm() / tc.norm()
        })
        .collect();
    assert!(ratios.windows(2).all(|w| w[1] < w[0]), "{ratios:?}");
    assert!(ratios[2] < 0.05, "{ratios:?}");
}

#[test]
fn ladder_gaps_shrink_and_deep_cut_is_exact() {
    let opts = SolverOptions::default();
    let m = model(0.05, 120, 1);
    let reference = resonances(&m, 0.0, &opts).unwrap();
    let ladder = build_ladder(&m, 0.5, 0.25, 3, &opts).unwrap();
    let rows = convergence_rows(&ladder, &reference).unwrap();
    for w in rows.windows(2) {
        assert!(w[1].gap0 <= w[0].gap0.max(GAP_FLOOR));
        assert!(w[1].gap1 <= w[0].gap1.max(GAP_FLOOR));
    }
    let below = resonances(&m, 0.5 * m.grid.nodes()[0], &opts).unwrap();
    assert_eq!(below.lambda0, reference.lambda0);
    assert!((below.lambda1 - reference.lambda1).norm() < 1e-14);
}

#[test]
fn identity_residual_follows_quadrature_error() {
    let p = ModelParams { g: 0.3, n_modes: 8, n_max: 2, theta: Theta::ZERO, ..Default::default() };
    let m = Model::new(p, QuadratureRule::GaussLegendre).unwrap();
    let bump = Bump { center: 1.0, half_width: 0.5 };
    let h = ModeFunction::from_radial(&m.grid, |r| C64::new(bump.eval(r), 0.0));
    let psi: Vec<C64> = (0..m.basis.dim()).map(|i| C64::new(1.0 + (i % 3) as f64, 0.5)).collect();
    let coarse = finite_time_identity_check(&m, &h, &psi, 40.0, 2).unwrap();
    let finer = finite_time_identity_check(&m, &h, &psi, 40.0, 4).unwrap();
    assert!(coarse.residual > 1e-6, "coarse rule should be visibly inexact: {}", coarse.residual);
    assert!(finer.residual * 4.0 <= coarse.residual, "{} vs {}", finer.residual, coarse.residual);
    let fine = finite_time_identity_check(&m, &h, &psi, 40.0, 200).unwrap();
    assert!(fine.residual < 1e-9 * fine.psi_norm);
}
