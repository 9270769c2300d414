//! Arc geometry on the pages of a book realization and the crossing zones
//! found between lifted arcs.

use std::time::Duration;

use hetnet::book::exact_thickness;
use hetnet::graph::samples;
use hetnet::synth::{realize_book, RealizationConfig};

fn main() -> hetnet::Result<()> {
    let net = samples::two_cycle_chain();
    let emb = exact_thickness(&net, 4, Duration::from_secs(10))?.embedding;
    let real = realize_book(&net, &emb, &RealizationConfig::default())?;
    for (i, arc) in real.field.arcs().iter().enumerate() {
        let top = arc.page_coords().iter().map(|p| p[1].abs()).fold(0.0, f64::max);
        println!(
            "arc {i}: edge {} in {} half {:+} samples={} height={top:.3} min_speed={:.3}",
            arc.edge,
            arc.subspace,
            arc.half,
            arc.samples.len(),
            arc.min_speed()
        );
    }
    for e in &real.crossings.entries {
        println!("arcs {:?}: {:?} over arclength {:.3?} / {:.3?}", e.arcs, e.case, e.range_a, e.range_b);
    }
    Ok(())
}
