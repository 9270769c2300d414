//! Almost-complete realization of a hub with three returning spokes on
//! Q(3, 1), including basin sampling around the hub.

use hetnet::dynamics::{verify_all, VerifySettings};
use hetnet::graph::samples;
use hetnet::report::render_summary;
use hetnet::synth::{realize_almost_complete, RealizationConfig};

fn main() -> hetnet::Result<()> {
    let net = samples::fan_with_returns();
    let real = realize_almost_complete(&net, &RealizationConfig::default())?;
    for n in &real.nodes {
        let subs: Vec<String> = n.unstable.iter().map(|s| s.to_string()).collect();
        println!("node {} at rho={} unstable in {}", n.label, n.rho, subs.join(" "));
    }
    let report = verify_all(&real, &VerifySettings::default())?;
    print!("{}", render_summary(&real, &report));
    Ok(())
}
