//! Maximum matching of the closeness graph between two circle samples, with
//! the Hall deficiency witness.

use folner::matching::{build_graph, max_matching};
use folner::{Entourage, GroupModel, Rational};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let c = GroupModel::circle();
    let e = c.parse_window(&["0", "1/20", "1/10", "1/2"])?;
    let f = c.parse_window(&["1/40", "3/40", "3/5"])?;
    let inst = build_graph(&c, &e, &f, &Entourage::new(Rational::new(1, 20)))?;
    let m = max_matching(&inst.graph);
    println!("mu = {} of {}", m.mu, e.len());
    for [i, j] in &m.pairing {
        println!("  {} -> {}", inst.left.as_slice()[*i], inst.right.as_slice()[*j]);
    }
    let witness: Vec<String> = m.witness.iter().map(|&i| inst.left.as_slice()[i].to_string()).collect();
    println!(
        "deficiency witness {{{}}} with {} neighbours",
        witness.join(", "),
        inst.graph.neighbourhood(&m.witness).len()
    );
    Ok(())
}
