//! Integrates every designed connection and writes one SVG per synchrony
//! subspace into a temporary directory.

use std::time::Duration;

use hetnet::book::exact_thickness;
use hetnet::dynamics::VerifySettings;
use hetnet::graph::samples;
use hetnet::report::{trajectory_plots, write_files};
use hetnet::synth::{realize_book, RealizationConfig};

fn main() -> hetnet::Result<()> {
    let net = samples::two_cycle_chain();
    let emb = exact_thickness(&net, 4, Duration::from_secs(10))?.embedding;
    let real = realize_book(&net, &emb, &RealizationConfig::default())?;
    let files = trajectory_plots(&real, &VerifySettings::default())?;
    let dir = std::env::temp_dir().join("hetnet-plots");
    write_files(&dir, &files)?;
    for (name, text) in &files {
        println!("{} ({} bytes)", dir.join(name).display(), text.len());
    }
    Ok(())
}
