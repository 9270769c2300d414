//! Constrained book thickness of small networks, plus the explicit
//! double-next-neighbour layouts.

use std::time::Duration;

use hetnet::book::{dnn_embedding, embedding_to_json, exact_thickness, validate_embedding, DnnMode};
use hetnet::graph::{samples, HetNet};

fn main() -> hetnet::Result<()> {
    let nets = [
        ("two_cycle_chain", samples::two_cycle_chain()),
        ("3-cycle", HetNet::cycle(3)?),
        ("4-cycle", HetNet::cycle(4)?),
        ("fan", samples::fan_with_returns()),
    ];
    for (name, net) in &nets {
        let t = exact_thickness(net, 6, Duration::from_secs(30))?;
        println!("{name}: pages={} cells={} optimal={}", t.k, t.k + 1, t.optimal);
    }

    let dnn = samples::dnn(6);
    for mode in [DnnMode::IncomingPairs, DnnMode::OutgoingPairs] {
        let emb = dnn_embedding(6, mode)?;
        let violations = validate_embedding(&dnn, &emb);
        println!("dnn(6) {mode:?}: pages={} violations={}", emb.pages, violations.len());
    }

    let two_cycle_chain = exact_thickness(&samples::two_cycle_chain(), 4, Duration::from_secs(10))?;
    println!("{}", embedding_to_json(&samples::two_cycle_chain(), &two_cycle_chain.embedding));
    Ok(())
}
