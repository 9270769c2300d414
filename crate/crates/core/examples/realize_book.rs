//! Book-embedding realization of the three-node network with two 2-cycles on
//! P_2, followed by trajectory verification.

use std::time::Duration;

use hetnet::book::exact_thickness;
use hetnet::dynamics::{verify_all, VerifySettings};
use hetnet::graph::samples;
use hetnet::report::render_summary;
use hetnet::synth::{realize_book, RealizationConfig};

fn main() -> hetnet::Result<()> {
    let net = samples::two_cycle_chain();
    let emb = exact_thickness(&net, 4, Duration::from_secs(10))?.embedding;
    let real = realize_book(&net, &emb, &RealizationConfig::default())?;
    println!("arcs={} tubes={}", real.connections.len(), real.field.tubes().len());
    let report = verify_all(&real, &VerifySettings::default())?;
    for c in &report.connections {
        println!(
            "{} -> {} half={:+} doubled={} hit={:?} passed={}",
            c.source, c.target, c.half, c.doubled, c.hit_time, c.passed
        );
    }
    print!("{}", render_summary(&real, &report));
    Ok(())
}
