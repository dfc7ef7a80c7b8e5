//! Relative-bound estimates for creation, annihilation and interaction operators
//! against (H_f + 1)^{1/2}, over random photon profiles.

use sbscatter::dynamics::standard_estimate_check;
use sbscatter::model::{Model, ModelParams, QuadratureRule};

fn main() -> sbscatter::Result<()> {
    let model = Model::new(ModelParams { n_modes: 6, n_max: 3, ..Default::default() }, QuadratureRule::GaussLegendre)?;
    let r = standard_estimate_check(&model, 100, 7)?;
    println!("worst ratio over {} trials (bound 1):", r.trials);
    println!("  creation     {:.6}", r.creation);
    println!("  annihilation {:.6}", r.annihilation);
    println!("  interaction  {:.6}", r.interaction);
    println!("single-mode ratios, observed vs sqrt(N w / (N w + 1)):");
    for (o, e) in &r.single_mode {
        println!("  {o:.15} {e:.15}");
    }
    Ok(())
}
