//! Boolean view of non-exhaustive OR gateways.
//!
//! An OR gateway with alternatives `{(a,b),(a,c)}` reads as the exclusive
//! disjunction `(a∧b)⊕(a∧c)`; [`factor`] pulls literals shared by every branch
//! out front, giving `a∧(b⊕c)`. Only negation-free, constant-free rewrites are
//! made, so the result can always be drawn with AND and XOR gateways again.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::cx_model::{Direction, GatewayKind, UcxGraph};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimplifyError {
    #[error("an OR gateway needs at least one alternative")]
    NoAlternatives,
    #[error("alternative {0} is empty")]
    EmptyAlternative(usize),
    #[error("{0:?} is not a non-exhaustive OR gateway")]
    NotAnOrGateway(String),
    #[error("gateway {0:?} has no recorded alternatives")]
    MissingAlternatives(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoolExpr {
    Var(String),
    And(Vec<BoolExpr>),
    Xor(Vec<BoolExpr>),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Notation {
    /// `∧` and `⊕`.
    #[default]
    Unicode,
    /// `&` and `^`.
    Ascii,
}

impl std::str::FromStr for Notation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "unicode" => Ok(Notation::Unicode),
            "ascii" => Ok(Notation::Ascii),
            other => Err(format!("unknown notation {other:?} (expected unicode|ascii)")),
        }
    }
}

impl BoolExpr {
    pub fn var(name: impl Into<String>) -> Self {
        BoolExpr::Var(name.into())
    }

    /// Variables in first-appearance order, without repeats.
    pub fn variables(&self) -> Vec<&str> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        self.collect_vars(&mut seen, &mut out);
        out
    }

    fn collect_vars<'a>(&'a self, seen: &mut BTreeSet<&'a str>, out: &mut Vec<&'a str>) {
        match self {
            BoolExpr::Var(v) => {
                if seen.insert(v) {
                    out.push(v);
                }
            }
            BoolExpr::And(xs) | BoolExpr::Xor(xs) => xs.iter().for_each(|x| x.collect_vars(seen, out)),
        }
    }

    pub fn eval(&self, assignment: &dyn Fn(&str) -> bool) -> bool {
        match self {
            BoolExpr::Var(v) => assignment(v),
            BoolExpr::And(xs) => xs.iter().all(|x| x.eval(assignment)),
            BoolExpr::Xor(xs) => xs.iter().filter(|x| x.eval(assignment)).count() % 2 == 1,
        }
    }

    pub fn render(&self, notation: Notation) -> String {
        let (and, xor) = match notation {
            Notation::Unicode => ("∧", "⊕"),
            Notation::Ascii => ("&", "^"),
        };
        self.render_with(and, xor)
    }

    fn render_with(&self, and: &str, xor: &str) -> String {
        let wrap = |x: &BoolExpr| match x {
            BoolExpr::Var(v) => v.clone(),
            other => format!("({})", other.render_with(and, xor)),
        };
        match self {
            BoolExpr::Var(v) => v.clone(),
            BoolExpr::And(xs) => xs.iter().map(wrap).collect::<Vec<_>>().join(and),
            BoolExpr::Xor(xs) => xs.iter().map(wrap).collect::<Vec<_>>().join(xor),
        }
    }
}

impl fmt::Display for BoolExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(Notation::Unicode))
    }
}

fn clause(members: &BTreeSet<String>) -> BoolExpr {
    if members.len() == 1 {
        BoolExpr::var(members.iter().next().expect("one member"))
    } else {
        BoolExpr::And(members.iter().map(BoolExpr::var).collect())
    }
}

/// Exclusive disjunction with one conjunction per alternative.
pub fn or_formula(alternatives: &[BTreeSet<String>]) -> Result<BoolExpr, SimplifyError> {
    if alternatives.is_empty() {
        return Err(SimplifyError::NoAlternatives);
    }
    if let Some(i) = alternatives.iter().position(BTreeSet::is_empty) {
        return Err(SimplifyError::EmptyAlternative(i));
    }
    let mut clauses: Vec<BoolExpr> = alternatives.iter().map(clause).collect();
    Ok(if clauses.len() == 1 {
        clauses.remove(0)
    } else {
        BoolExpr::Xor(clauses)
    })
}

/// Top-level literals of a branch.
fn literals(e: &BoolExpr) -> BTreeSet<&str> {
    match e {
        BoolExpr::Var(v) => BTreeSet::from([v.as_str()]),
        BoolExpr::And(xs) => xs
            .iter()
            .filter_map(|x| match x {
                BoolExpr::Var(v) => Some(v.as_str()),
                _ => None,
            })
            .collect(),
        BoolExpr::Xor(_) => BTreeSet::new(),
    }
}

fn without(e: &BoolExpr, common: &BTreeSet<&str>) -> Option<BoolExpr> {
    let rest: Vec<BoolExpr> = match e {
        BoolExpr::Var(v) if common.contains(v.as_str()) => Vec::new(),
        BoolExpr::And(xs) => xs
            .iter()
            .filter(|x| !matches!(x, BoolExpr::Var(v) if common.contains(v.as_str())))
            .cloned()
            .collect(),
        other => vec![other.clone()],
    };
    match rest.len() {
        0 => None,
        1 => rest.into_iter().next(),
        _ => Some(BoolExpr::And(rest)),
    }
}

/// Extracts literals common to every XOR branch, recursively. A factor is only
/// taken when every branch keeps a non-empty remainder.
pub fn factor(expr: &BoolExpr) -> BoolExpr {
    match expr {
        BoolExpr::Var(_) => expr.clone(),
        BoolExpr::And(xs) => {
            let mut flat = Vec::new();
            for x in xs {
                match factor(x) {
                    BoolExpr::And(inner) => flat.extend(inner),
                    other => flat.push(other),
                }
            }
            if flat.len() == 1 {
                flat.remove(0)
            } else {
                BoolExpr::And(flat)
            }
        }
        BoolExpr::Xor(xs) => {
            let branches: Vec<BoolExpr> = xs.iter().map(factor).collect();
            if branches.len() < 2 {
                return BoolExpr::Xor(branches);
            }
            let mut common: BTreeSet<&str> = literals(&branches[0]);
            for b in &branches[1..] {
                let l = literals(b);
                common.retain(|v| l.contains(v));
            }
            if common.is_empty() {
                return BoolExpr::Xor(branches);
            }
            let residuals: Option<Vec<BoolExpr>> = branches.iter().map(|b| without(b, &common)).collect();
            let Some(residuals) = residuals else {
                return BoolExpr::Xor(branches);
            };
            // Keep the literal order of the first branch.
            let order = branches[0].variables();
            let mut out: Vec<BoolExpr> = order
                .into_iter()
                .filter(|v| common.contains(v))
                .map(BoolExpr::var)
                .collect();
            out.push(factor(&BoolExpr::Xor(residuals)));
            BoolExpr::And(out)
        }
    }
}

/// Formula of one OR gateway; AND gateways among its members are expanded to
/// their activities.
pub fn gateway_formula(u: &UcxGraph, gateway: &str) -> Result<BoolExpr, SimplifyError> {
    match u.gateway(gateway) {
        Some(g) if g.kind == GatewayKind::Or => {}
        _ => return Err(SimplifyError::NotAnOrGateway(gateway.to_string())),
    }
    let alts = u
        .alternatives(gateway)
        .ok_or_else(|| SimplifyError::MissingAlternatives(gateway.to_string()))?;
    let fan = |id: &str| match u.direction() {
        Direction::Split => u.successors(id),
        Direction::Join => u.predecessors(id),
    };
    let expanded: Vec<BTreeSet<String>> = alts
        .iter()
        .map(|alt| {
            alt.iter()
                .flat_map(|m| match u.gateway(m) {
                    Some(g) if g.kind == GatewayKind::And => fan(m).into_iter().collect::<Vec<_>>(),
                    _ => vec![m.clone()],
                })
                .collect()
        })
        .collect();
    or_formula(&expanded)
}

/// `(gateway id, raw formula, factored formula)` for every OR gateway.
pub fn simplify_graph(u: &UcxGraph) -> Result<Vec<(String, BoolExpr, BoolExpr)>, SimplifyError> {
    u.gateways()
        .filter(|g| g.kind == GatewayKind::Or)
        .map(|g| {
            let raw = gateway_formula(u, &g.id)?;
            let factored = factor(&raw);
            Ok((g.id.clone(), raw, factored))
        })
        .collect()
}

/// Redraws every OR gateway as the AND/XOR gateway tree of its factored
/// formula. Gateways are named `<or id>.1`, `<or id>.2`, ... in creation order.
pub fn render_as_gateways(u: &UcxGraph) -> Result<UcxGraph, SimplifyError> {
    let split = match u.direction() {
        Direction::Split => u.clone(),
        Direction::Join => u.mirrored(),
    };
    let mut out = split.clone();
    let ors: Vec<String> = split
        .gateways()
        .filter(|g| g.kind == GatewayKind::Or)
        .map(|g| g.id.clone())
        .collect();
    for id in ors {
        let formula = factor(&gateway_formula(&split, &id)?);
        let parents = split.predecessors(&id);
        out.remove_gateway(&id);
        let mut counter = 0usize;
        let mut taken: BTreeSet<String> = out.node_ids();
        let root = build(&mut out, &formula, &id, &mut counter, &mut taken);
        for p in parents {
            out.insert_edge(p, root.clone());
        }
    }
    // AND gateways left without a parent (their members were inlined) go too.
    let orphans: Vec<String> = out
        .gateways()
        .filter(|g| g.kind == GatewayKind::And && out.predecessors(&g.id).is_empty())
        .map(|g| g.id.clone())
        .collect();
    for id in orphans {
        out.remove_gateway(&id);
    }
    Ok(match u.direction() {
        Direction::Split => out,
        Direction::Join => out.mirrored(),
    })
}

fn build(
    g: &mut UcxGraph,
    e: &BoolExpr,
    base: &str,
    counter: &mut usize,
    taken: &mut BTreeSet<String>,
) -> String {
    let (kind, xs) = match e {
        BoolExpr::Var(v) => return v.clone(),
        BoolExpr::And(xs) => (GatewayKind::And, xs),
        BoolExpr::Xor(xs) => (GatewayKind::Xor, xs),
    };
    let id = loop {
        *counter += 1;
        let candidate = format!("{base}.{counter}");
        if taken.insert(candidate.clone()) {
            break candidate;
        }
    };
    g.add_gateway(id.clone(), kind);
    for x in xs {
        let child = build(g, x, base, counter, taken);
        g.insert_edge(id.clone(), child);
    }
    id
}

/// Truth table of `e` over `vars`; bit `i` of the row number assigns `vars[i]`.
pub fn truth_table(e: &BoolExpr, vars: &[&str]) -> Vec<bool> {
    let index: BTreeMap<&str, usize> = vars.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    (0u32..1 << vars.len())
        .map(|bits| e.eval(&|v| index.get(v).is_some_and(|i| bits & (1 << i) != 0)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::or_example_graphs;
    use crate::unification::unify_graphs;
    use crate::verify::verify;
    use proptest::prelude::*;

    fn alts(xs: &[&[&str]]) -> Vec<BTreeSet<String>> {
        xs.iter().map(|a| a.iter().map(|s| s.to_string()).collect()).collect()
    }

    #[test]
    fn formula_examples() {
        let f = or_formula(&alts(&[&["a", "b"], &["a", "c"]])).unwrap();
        assert_eq!(f.to_string(), "(a∧b)⊕(a∧c)");
        assert_eq!(or_formula(&alts(&[&["a"]])).unwrap(), BoolExpr::var("a"));
        assert_eq!(or_formula(&alts(&[&["a", "b"], &["c"]])).unwrap().to_string(), "(a∧b)⊕c");
        assert_eq!(or_formula(&[]), Err(SimplifyError::NoAlternatives));
        assert_eq!(or_formula(&alts(&[&["a"], &[]])), Err(SimplifyError::EmptyAlternative(1)));
    }

    #[test]
    fn factor_examples() {
        let f = factor(&or_formula(&alts(&[&["a", "b"], &["a", "c"]])).unwrap());
        assert_eq!(f.to_string(), "a∧(b⊕c)");
        assert_eq!(f.render(Notation::Ascii), "a&(b^c)");
        let x = or_formula(&alts(&[&["a"], &["b"]])).unwrap();
        assert_eq!(factor(&x), x);
        let f = factor(&or_formula(&alts(&[&["a", "b", "c"], &["a", "b", "d"]])).unwrap());
        assert_eq!(f.to_string(), "a∧b∧(c⊕d)");
    }

    #[test]
    fn no_factor_when_a_branch_would_vanish() {
        let x = or_formula(&alts(&[&["a"], &["a", "b"]])).unwrap();
        assert_eq!(factor(&x), x);
    }

    /// Exactly one alternative holding, checked against the formula directly.
    #[test]
    fn formula_accepts_each_single_alternative() {
        let a = alts(&[&["a", "b"], &["c"]]);
        let f = or_formula(&a).unwrap();
        for alt in &a {
            assert!(f.eval(&|v| alt.contains(v)));
        }
        assert!(!f.eval(&|v| ["a", "b", "c"].contains(&v)));
    }

    #[test]
    fn or_example_renders_as_and_of_xor() {
        let graphs = or_example_graphs();
        let u = unify_graphs(&graphs, Direction::Split).unwrap().graph;
        let report = simplify_graph(&u).unwrap();
        assert_eq!(report.len(), 1);
        assert_eq!(report[0].1.to_string(), "(a∧b)⊕(a∧c)");
        assert_eq!(report[0].2.to_string(), "a∧(b⊕c)");
        let drawn = render_as_gateways(&u).unwrap();
        assert_eq!(drawn.validate(), Ok(()));
        assert!(drawn.gateways().all(|g| g.kind != GatewayKind::Or));
        assert!(verify(&drawn, &graphs).unwrap().violations.is_empty());
    }

    #[test]
    fn join_graphs_render_too() {
        let graphs: Vec<_> = or_example_graphs().iter().map(|g| g.reversed()).collect();
        let u = unify_graphs(&graphs, Direction::Join).unwrap().graph;
        let drawn = render_as_gateways(&u).unwrap();
        assert_eq!(drawn.validate(), Ok(()));
        assert!(verify(&drawn, &graphs).unwrap().violations.is_empty());
    }

    #[test]
    fn composite_members_are_expanded() {
        use crate::cx_model::CxGraph;
        let graphs = vec![
            CxGraph::from_edges(["s", "a", "b"], [("s", "a"), ("s", "b")]).unwrap(),
            CxGraph::from_edges(["s", "a", "b", "c"], [("s", "a"), ("s", "b"), ("s", "c")]).unwrap(),
        ];
        let u = unify_graphs(&graphs, Direction::Split).unwrap().graph;
        let report = simplify_graph(&u).unwrap();
        assert_eq!(report[0].1.to_string(), "(a∧b)⊕(a∧b∧c)");
        assert_eq!(report[0].2, report[0].1);
        let drawn = render_as_gateways(&u).unwrap();
        assert_eq!(drawn.validate(), Ok(()));
        assert!(verify(&drawn, &graphs).unwrap().violations.is_empty());
    }

    #[test]
    fn rendering_keeps_random_unifications_sound_and_complete() {
        use crate::verify::{random_instance, RandomInstanceConfig};
        for seed in 0..150 {
            let graphs = random_instance(seed, RandomInstanceConfig::default());
            for dir in [Direction::Split, Direction::Join] {
                let u = unify_graphs(&graphs, dir).unwrap().graph;
                let drawn = render_as_gateways(&u).unwrap();
                assert_eq!(drawn.validate(), Ok(()), "seed {seed}");
                let r = verify(&drawn, &graphs).unwrap();
                assert!(r.violations.is_empty(), "seed {seed} {dir}: {:?}", r.violations);
            }
        }
    }

    fn arb_alternatives() -> impl Strategy<Value = Vec<BTreeSet<String>>> {
        let names: Vec<String> = (0..12).map(|i| format!("v{i}")).collect();
        prop::collection::vec(prop::sample::subsequence(names, 1..=5), 1..6).prop_map(|v| {
            let set: BTreeSet<BTreeSet<String>> = v.into_iter().map(|s| s.into_iter().collect()).collect();
            set.into_iter().collect()
        })
    }

    proptest! {
        #[test]
        fn factor_preserves_truth_table(a in arb_alternatives()) {
            let raw = or_formula(&a).unwrap();
            let factored = factor(&raw);
            let vars = raw.variables();
            prop_assert!(vars.len() <= 12);
            prop_assert_eq!(truth_table(&raw, &vars), truth_table(&factored, &vars));
            let leaves: BTreeSet<&str> = factored.variables().into_iter().collect();
            let union: BTreeSet<&str> = a.iter().flatten().map(String::as_str).collect();
            prop_assert_eq!(leaves, union);
        }

        #[test]
        fn factor_is_idempotent(a in arb_alternatives()) {
            let once = factor(&or_formula(&a).unwrap());
            prop_assert_eq!(factor(&once), once.clone());
        }
    }
}
