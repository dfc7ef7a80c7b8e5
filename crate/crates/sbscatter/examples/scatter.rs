//! One-photon transition amplitude: the resonance-pole principal term against a
//! self-adjoint spectral-sum oracle, for a photon profile centred on the resonance.

use sbscatter::model::{Model, ModelParams, QuadratureRule};
use sbscatter::scattering::{build_g, oracle_transition, principal_term, PhotonProfile};
use sbscatter::spectral::{resonances, SolverOptions};

fn main() -> sbscatter::Result<()> {
    let n_modes = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(40);
    println!("{:>6} {:>26} {:>26} {:>9} {:>9}", "g", "T_P", "T_oracle", "rel dev", "|T_P|/g²");
    for g in [0.1, 0.05, 0.02] {
        let params = ModelParams { g, n_modes, n_max: 2, ..Default::default() };
        let model = Model::new(params, QuadratureRule::GaussLegendre)?;
        let res = resonances(&model, 0.0, &SolverOptions::default())?;
        let profile = PhotonProfile::resonance_centered(&res, &model.params, 0.2);
        let pairing = build_g(&profile, &model.params)?;
        let tp = principal_term(&pairing, &res)?.t_p;
        let oracle = oracle_transition(&pairing, &model)?.t;
        println!(
            "{g:>6} {:>12.5e}{:+.5e}i {:>12.5e}{:+.5e}i {:>9.4} {:>9.4}",
            tp.re,
            tp.im,
            oracle.re,
            oracle.im,
            (oracle - tp).norm() / tp.norm(),
            tp.norm() / (g * g)
        );
    }
    Ok(())
}
