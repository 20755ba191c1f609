//! Unifies the three per-partition graphs of the running example, in both
//! directions, and prints the classified matrix, JSON and DOT.

use ucx::fixtures::partition_graphs;
use ucx::{unify_graphs, Direction};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let graphs = partition_graphs();
    for (i, g) in graphs.iter().enumerate() {
        let edges: Vec<String> = g.edges().map(|(a, b)| format!("({a},{b})")).collect();
        println!("g{}: {}", i + 1, edges.join(" "));
    }

    let split = unify_graphs(&graphs, Direction::Split)?;
    println!("\nclassified matrix:\n{}", split.matrix);
    println!("unified graph:\n{}", split.graph.to_json());
    println!("{}", split.graph.to_dot());

    let join = unify_graphs(&graphs, Direction::Join)?;
    let edges: Vec<String> = join.graph.edges().map(|(a, b)| format!("({a},{b})")).collect();
    println!("join direction: {}", edges.join(" "));
    Ok(())
}
