//! The inductive networks P_n and Q(n1, n2), their balanced colourings and
//! minimal synchrony subspaces.

use hetnet::ccn::{build_pn, build_q, enumerate_balanced, minimal_synchrony};

fn main() -> hetnet::Result<()> {
    let p2 = build_pn(2)?;
    for t in 1..=p2.types {
        println!("P_2 type {t}: {:?}", p2.edges_of_type(t));
    }
    for n in 1..=5 {
        let ccn = build_pn(n)?;
        let balanced = enumerate_balanced(&ccn, 8)?;
        let minimal: Vec<String> = minimal_synchrony(&ccn)?.iter().map(|s| s.to_string()).collect();
        println!("P_{n}: cells={} balanced={} minimal={}", ccn.cells, balanced.len(), minimal.join(" "));
    }
    for (n1, n2) in [(0, 1), (1, 1), (3, 1), (1, 2)] {
        let ccn = build_q(n1, n2)?;
        let minimal: Vec<String> = minimal_synchrony(&ccn)?.iter().map(|s| s.to_string()).collect();
        println!("Q({n1},{n2}): cells={} types={} minimal={}", ccn.cells, ccn.types, minimal.join(" "));
    }
    println!("{}", build_q(0, 1)?.to_dot());
    Ok(())
}
