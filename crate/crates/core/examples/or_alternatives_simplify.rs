//! Two graphs that can only be merged with a non-exhaustive OR gateway, its
//! recorded alternatives, and the boolean formula before and after factoring.

use ucx::fixtures::or_example_graphs;
use ucx::simplify::{render_as_gateways, simplify_graph, Notation};
use ucx::{unify_graphs, Direction};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let u = unify_graphs(&or_example_graphs(), Direction::Split)?.graph;
    for (gateway, alternatives) in u.or_alternatives() {
        let alts: Vec<String> = alternatives
            .iter()
            .map(|a| format!("({})", a.iter().cloned().collect::<Vec<_>>().join(",")))
            .collect();
        println!("{gateway} alternatives: {}", alts.join(" "));
    }
    for (gateway, raw, factored) in simplify_graph(&u)? {
        println!("{gateway}: {raw}  =>  {factored}");
        println!("{gateway} (ascii): {}", factored.render(Notation::Ascii));
    }

    let redrawn = render_as_gateways(&u)?;
    println!("\nwith OR redrawn as AND/XOR gateways:");
    for (a, b) in redrawn.edges() {
        println!("  {a} -> {b}");
    }
    Ok(())
}
