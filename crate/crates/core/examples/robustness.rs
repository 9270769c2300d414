//! Re-verifies the book realization under random admissible perturbations of
//! the coupling function.

use std::time::Duration;

use hetnet::book::exact_thickness;
use hetnet::dynamics::{perturb, verify_all, verify_connection, VerifySettings};
use hetnet::graph::samples;
use hetnet::synth::{realize_book, RealizationConfig};

fn main() -> hetnet::Result<()> {
    let net = samples::two_cycle_chain();
    let emb = exact_thickness(&net, 4, Duration::from_secs(10))?.embedding;
    let real = realize_book(&net, &emb, &RealizationConfig::default())?;

    let s = VerifySettings { perturb: 1e-3, trials: 10, seed: 7, ..VerifySettings::default() };
    let report = verify_all(&real, &s)?;
    let r = report.robustness.expect("trials were requested");
    println!("eta={} passed {}/{}", r.eta, r.passed_trials, r.trials.len());

    for eta in [1e-2, 1e-1] {
        let f = perturb(&real.field, eta, 1);
        let passed = (0..real.connections.len())
            .map(|i| verify_connection(&real, &f, i, &s))
            .collect::<hetnet::Result<Vec<_>>>()?
            .iter()
            .filter(|c| c.passed)
            .count();
        println!("eta={eta}: {passed}/{} arcs pass", real.connections.len());
    }
    Ok(())
}
