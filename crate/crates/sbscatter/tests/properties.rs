use proptest::prelude::*;
use sbscatter::linalg::{hermitian_eigen, ShiftedLu};
use sbscatter::model::{
    build_grid, form_factor, multiset_count, FockBasis, Level, Model, ModelParams, QuadratureRule, Theta,
};
use sbscatter::multiscale::cutoffs;
use sbscatter::spectral::{eigensolve, ground_state, locate_resonances, riesz_projection};
use sbscatter::C64;
use std::f64::consts::PI;

fn model(g: f64, theta: f64, n_modes: usize, n_max: usize) -> Model {
    let theta = if theta == 0.0 { Theta::ZERO } else { Theta::imaginary(theta) };
    let p = ModelParams { g, theta, n_modes, n_max, ..Default::default() };
    Model::new(p, QuadratureRule::GaussLegendre).unwrap()
}

fn max_entry_diff(a: &faer::Mat<C64>, b: &faer::Mat<C64>) -> f64 {
    let mut m: f64 = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn basis_dimension_counts_symmetric_powers(n_modes in 1usize..9, n_max in 0usize..4) {
        let b = FockBasis::new(n_modes, n_max);
        let expected: usize = 2 * (0..=n_max).map(|k| multiset_count(n_modes, k)).sum::<usize>();
        prop_assert_eq!(b.dim(), expected);
        for level in [Level::Ground, Level::Excited] {
            let v = b.vacuum(level);
            prop_assert_eq!(b.boson_number(v), 0);
            prop_assert_eq!(b.level(v), level);
        }
    }

    #[test]
    fn grid_nodes_increase_and_weights_sum_to_cutoff(n_modes in 2usize..300, k_max in 6.0f64..9.0) {
        let p = ModelParams { n_modes, k_max, ..Default::default() };
        let grid = build_grid(&p, QuadratureRule::GaussLegendre).unwrap();
        prop_assert!(grid.nodes()[0] > 0.0);
        prop_assert!(grid.nodes().windows(2).all(|w| w[1] > w[0]));
        let total: f64 = grid.weights().iter().sum();
        prop_assert!((total - k_max).abs() < 1e-12 * k_max);
    }

    #[test]
    fn form_factor_positive_and_rapidly_decaying(k in 1e-6f64..20.0, far in 10.0f64..40.0, mu in 0.01f64..0.49) {
        let p = ModelParams { mu, ..Default::default() };
        prop_assert!(form_factor(&p, k).unwrap() > 0.0);
        prop_assert!(form_factor(&p, far).unwrap() * far.powi(20) < 1e-20);
    }

    #[test]
    fn invalid_parameters_rejected(mu in prop_oneof![-1.0f64..=0.0, 0.5f64..2.0], im in (PI / 16.0)..1.0) {
        let bad_mu = ModelParams { mu, ..Default::default() };
        let bad_angle = ModelParams { theta: Theta::imaginary(im), ..Default::default() };
        let bad_real_part = ModelParams { theta: Theta(C64::new(2e-3, 0.1)), ..Default::default() };
        prop_assert!(bad_mu.validate().is_err());
        prop_assert!(bad_angle.validate().is_err());
        prop_assert!(bad_real_part.validate().is_err());
    }

    #[test]
    fn hamiltonian_symmetries(g in 0.0f64..0.5, theta in 0.01f64..0.19, n_modes in 2usize..7, n_max in 1usize..3) {
        let h0 = model(g, 0.0, n_modes, n_max).hamiltonian(0.0).unwrap();
        prop_assert!(h0.hermiticity_defect() < 1e-14);
        let ht = model(g, theta, n_modes, n_max).hamiltonian(0.0).unwrap();
        prop_assert!(ht.symmetry_defect() < 1e-14);
        prop_assert_eq!(ht.dim(), ht.basis().dim());
    }

    #[test]
    fn vanishing_dilation_recovers_self_adjoint_matrix(g in 0.0f64..0.5, n_modes in 2usize..7) {
        let h0 = model(g, 0.0, n_modes, 2).hamiltonian(0.0).unwrap();
        let ht = model(g, 1e-15, n_modes, 2).hamiltonian(0.0).unwrap();
        prop_assert!(max_entry_diff(h0.entries(), ht.entries()) < 1e-13);
    }

    #[test]
    fn full_cutoff_equals_free_matrix(g in 0.01f64..0.5, theta in 0.0f64..0.19, n_modes in 2usize..7) {
        let m = model(g, theta, n_modes, 2);
        let free = model(0.0, theta, n_modes, 2).hamiltonian(0.0).unwrap();
        let cut = m.hamiltonian(m.params.k_max).unwrap();
        prop_assert!(max_entry_diff(cut.entries(), free.entries()) == 0.0);
        // Raising the cutoff only removes entries.
        let lo = m.hamiltonian(1.0).unwrap();
        let hi = m.hamiltonian(3.0).unwrap();
        for j in 0..lo.dim() {
            for i in 0..lo.dim() {
                if lo.get(i, j).norm() == 0.0 {
                    prop_assert!(hi.get(i, j).norm() == 0.0);
                }
            }
        }
    }

    #[test]
    fn free_spectrum_is_sums_of_dispersions(n_modes in 2usize..6, n_max in 1usize..3) {
        let m = model(0.0, 0.0, n_modes, n_max);
        let (vals, _) = hermitian_eigen(m.hamiltonian(0.0).unwrap().entries()).unwrap();
        let nodes = m.grid.nodes();
        let mut expected: Vec<f64> = (0..m.basis.dim())
            .map(|s| {
                let atom = if m.basis.level(s) == Level::Excited { m.params.e1 } else { 0.0 };
                atom + m.basis.occupation(s).iter().map(|&j| nodes[j as usize]).sum::<f64>()
            })
            .collect();
        expected.sort_by(f64::total_cmp);
        for (a, b) in vals.iter().zip(&expected) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn resonance_invariants(g in 0.02f64..0.3, theta in 0.05f64..0.19) {
        let m = model(g, theta, 24, 1);
        let h = m.hamiltonian(0.0).unwrap();
        let eigs = eigensolve(&h).unwrap();
        let res = locate_resonances(&eigs, &m.basis, &m.params).unwrap();
        prop_assert!(res.lambda1.im < 0.0);
        prop_assert!(res.lambda0_theta.im.abs() < 1e-6);
        let h0 = model(g, 0.0, 24, 1).hamiltonian(0.0).unwrap();
        let gs = ground_state(&h0).unwrap();
        let lowest = eigensolve(&h0).unwrap().iter().map(|e| e.value.re).fold(f64::INFINITY, f64::min);
        prop_assert!((gs.energy - lowest).abs() < 1e-10);
        let p = res.p1_theta.dense();
        let p2 = &p * &p;
        prop_assert!(max_entry_diff(&p2, &p) < 1e-8);
    }

    #[test]
    fn riesz_projection_matches_eigenvector_dyad(g in 0.02f64..0.2) {
        let m = model(g, PI / 24.0, 8, 1);
        let h = m.hamiltonian(0.0).unwrap();
        let eigs = eigensolve(&h).unwrap();
        let res = locate_resonances(&eigs, &m.basis, &m.params).unwrap();
        let gap = eigs.iter().map(|e| (e.value - res.lambda1).norm()).filter(|d| *d > 1e-12).fold(f64::INFINITY, f64::min);
        let riesz = riesz_projection(&h, res.lambda1, 0.5 * gap, 256).unwrap();
        let diff = riesz.entries() - res.p1_theta.dense();
        prop_assert!(sbscatter::linalg::spectral_norm(&diff).unwrap() < 1e-8);
    }

    #[test]
    fn resolvent_solve_inverts_shift(g in 0.0f64..0.3, re in -1.0f64..2.0, im in -1.0f64..-0.01) {
        let h = model(g, PI / 32.0, 4, 2).hamiltonian(0.0).unwrap();
        let z = C64::new(re, im);
        let b: Vec<C64> = (0..h.dim()).map(|i| C64::new(1.0, i as f64)).collect();
        let x = ShiftedLu::new(h.entries(), z).solve(&b);
        let back: Vec<C64> = h.apply(&x).iter().zip(&x).map(|(hx, xi)| hx - z * xi).collect();
        prop_assert!(back.iter().zip(&b).all(|(p, q)| (p - q).norm() < 1e-9 * (1.0 + q.norm())));
    }

    #[test]
    fn cutoffs_strictly_decrease(rho0 in 0.05f64..0.99, rho in 0.01f64..0.25, depth in 1usize..10) {
        let c = cutoffs(rho0, rho, depth);
        prop_assert!(c.windows(2).all(|w| w[1] < w[0]));
    }
}
