use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::group_semantics;
use crate::cx_model::{find_cycle, CxGraph, UcxGraph};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomInstanceConfig {
    pub max_nodes: usize,
    pub max_graphs: usize,
}

impl Default for RandomInstanceConfig {
    fn default() -> Self {
        RandomInstanceConfig {
            max_nodes: 8,
            max_graphs: 5,
        }
    }
}

/// Random input graphs for unification. All graphs respect one shared node
/// order, so their union is acyclic.
pub fn random_instance(seed: u64, config: RandomInstanceConfig) -> Vec<CxGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=config.max_nodes.max(2));
    let mut names: Vec<String> = (0..n).map(|i| ((b'a' + i as u8) as char).to_string()).collect();
    names.shuffle(&mut rng);
    let graphs = rng.gen_range(1..=config.max_graphs.max(1));
    (0..graphs)
        .map(|_| {
            let density: f64 = rng.gen_range(0.1..0.9);
            let members: Vec<&String> = names.iter().filter(|_| rng.gen_bool(0.75)).collect();
            let mut g = CxGraph::new();
            for m in &members {
                g.add_node(m.as_str());
            }
            for i in 0..members.len() {
                for j in i + 1..members.len() {
                    if rng.gen_bool(density) {
                        g.add_edge(members[i], members[j], None).expect("forward edges stay acyclic");
                    }
                }
            }
            g
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Mutation {
    Added(String, String),
    Removed(String, String),
}

/// Adds or removes one edge of `u` at random. Added edges end at an activity,
/// are new, keep the graph acyclic and change the admissible groups of some
/// activity (edits with identical semantics are never proposed). Returns `None`
/// if no such edit exists.
pub fn mutate(u: &UcxGraph, rng: &mut impl Rng) -> Option<(UcxGraph, Mutation)> {
    let edges: Vec<(String, String)> = u.edge_set().iter().cloned().collect();
    let add = rng.gen_bool(0.5) || edges.is_empty();
    if !add {
        let (a, b) = edges.choose(rng)?.clone();
        let mut out = u.clone();
        out.remove_edge(&a, &b);
        return Some((out, Mutation::Removed(a, b)));
    }
    let sources: Vec<String> = u.node_ids().into_iter().collect();
    let targets: Vec<&String> = u.activities().iter().collect();
    let semantics = group_semantics(u);
    let mut candidates = Vec::new();
    for s in &sources {
        for t in &targets {
            if s == *t || u.has_edge(s, t) {
                continue;
            }
            let mut edges: BTreeSet<(String, String)> = u.edge_set().clone();
            edges.insert((s.clone(), (*t).clone()));
            if find_cycle(&u.node_ids(), edges.iter()).is_some() {
                continue;
            }
            let mut edited = u.clone();
            edited.insert_edge(s.clone(), (*t).clone());
            if group_semantics(&edited) != semantics || !edited.violations().is_empty() {
                candidates.push((s.clone(), (*t).clone()));
            }
        }
    }
    let (a, b) = match candidates.choose(rng) {
        Some(e) => e.clone(),
        None if !edges.is_empty() => {
            let (a, b) = edges.choose(rng)?.clone();
            let mut out = u.clone();
            out.remove_edge(&a, &b);
            return Some((out, Mutation::Removed(a, b)));
        }
        None => return None,
    };
    let mut out = u.clone();
    out.insert_edge(a.clone(), b.clone());
    Some((out, Mutation::Added(a, b)))
}
