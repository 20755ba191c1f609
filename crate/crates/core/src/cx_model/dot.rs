use std::fmt::Write;

use super::{CxGraph, GatewayKind, UcxGraph};

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

impl CxGraph {
    /// Graphviz rendering; nodes and edges in lexicographic order.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph cx {\n");
        for n in &self.nodes {
            let _ = writeln!(out, "  {} [shape=box];", quote(n));
        }
        for ((a, b), c) in &self.edges {
            match c {
                Some(c) => {
                    let _ = writeln!(out, "  {} -> {} [label=\"{c:.3}\"];", quote(a), quote(b));
                }
                None => {
                    let _ = writeln!(out, "  {} -> {};", quote(a), quote(b));
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

impl UcxGraph {
    /// Graphviz rendering. Gateways are diamonds labelled `&`, `×`, `O*` or `O`;
    /// non-exhaustive OR gateways also list their alternatives.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph ucx {\n");
        for n in &self.activities {
            let _ = writeln!(out, "  {} [shape=box];", quote(n));
        }
        for g in self.gateways.values() {
            let mut label = g.kind.symbol().to_string();
            if g.kind == GatewayKind::Or {
                if let Some(alts) = self.or_alternatives.get(&g.id) {
                    label.push('\n');
                    label.push_str(&self.describe_alternatives(alts));
                }
            }
            let _ = writeln!(
                out,
                "  {} [shape=diamond, label={}, tooltip={}];",
                quote(&g.id),
                quote(&label),
                quote(&g.id)
            );
        }
        for (a, b) in &self.edges {
            let _ = writeln!(out, "  {} -> {};", quote(a), quote(b));
        }
        out.push_str("}\n");
        out
    }

    /// Renders alternatives as `{(a,b),(a,c)}`, expanding AND gateway members
    /// into their activity groups.
    pub fn describe_alternatives(&self, alternatives: &[std::collections::BTreeSet<String>]) -> String {
        let parts: Vec<String> = alternatives
            .iter()
            .map(|alt| {
                let members: Vec<String> = alt.iter().map(|m| self.describe_member(m)).collect();
                if members.len() == 1 && !members[0].starts_with('(') {
                    members[0].clone()
                } else {
                    format!("({})", members.join(","))
                }
            })
            .collect();
        format!("{{{}}}", parts.join(","))
    }

    fn describe_member(&self, id: &str) -> String {
        match self.gateways.get(id) {
            Some(g) => {
                let inner: Vec<String> = match g.direction {
                    super::Direction::Split => self.successors(id),
                    super::Direction::Join => self.predecessors(id),
                }
                .iter()
                .map(|m| self.describe_member(m))
                .collect();
                format!("({})", inner.join(","))
            }
            None => id.to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::Direction;
    use super::*;

    #[test]
    fn g2_dot() {
        let g = CxGraph::from_edges(["A", "F"], [("A", "F")]).unwrap();
        let dot = g.to_dot();
        assert_eq!(dot, "digraph cx {\n  \"A\" [shape=box];\n  \"F\" [shape=box];\n  \"A\" -> \"F\";\n}\n");
    }

    #[test]
    fn empty_dot_has_empty_body() {
        assert_eq!(CxGraph::new().to_dot(), "digraph cx {\n}\n");
        assert_eq!(UcxGraph::new(Direction::Split).to_dot(), "digraph ucx {\n}\n");
    }

    #[test]
    fn quoting() {
        let g = CxGraph::from_edges(["say \"hi\""], Vec::<(&str, &str)>::new()).unwrap();
        assert!(g.to_dot().contains(r#""say \"hi\"""#));
    }

    #[test]
    fn or_label_lists_alternatives() {
        let mut u = UcxGraph::new(Direction::Split);
        for a in ["f", "a", "b", "c"] {
            u.add_activity(a);
        }
        u.add_gateway("OR_C1", GatewayKind::Or);
        u.insert_edge("f", "OR_C1");
        for a in ["a", "b", "c"] {
            u.insert_edge("OR_C1", a);
        }
        let set = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect();
        u.set_alternatives("OR_C1", vec![set(&["a", "b"]), set(&["a", "c"])]);
        let dot = u.to_dot();
        assert!(dot.contains(r#""OR_C1" [shape=diamond, label="O\n{(a,b),(a,c)}""#), "{dot}");
    }
}
