use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Uniform};
use serde::{Deserialize, Serialize};

use super::VerifyError;
use crate::cx_model::CxGraph;
use crate::event_log::{ActivityEvent, EventLog};

/// Non-negative, non-Gaussian noise added to every timestamp.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Noise {
    /// Uniform on `[0, scale]`.
    Uniform { scale: f64 },
    /// Magnitude of a zero-centred Laplace draw with the given scale.
    Laplace { scale: f64 },
}

impl Noise {
    fn scale(&self) -> f64 {
        match *self {
            Noise::Uniform { scale } | Noise::Laplace { scale } => scale,
        }
    }

    fn sample(&self, rng: &mut impl Rng) -> f64 {
        match *self {
            Noise::Uniform { scale } => Uniform::new_inclusive(0.0, scale).sample(rng),
            // |Laplace(0, b)| is exponential with rate 1/b.
            Noise::Laplace { scale } => Exp::new(1.0 / scale).expect("positive scale").sample(rng),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticEdge {
    pub from: String,
    pub to: String,
    /// Linear coefficient of `from` in the timestamp of `to`. With weights of
    /// at least one a child never precedes its parents.
    #[serde(default = "one")]
    pub weight: f64,
    /// Time units added to the child.
    #[serde(default)]
    pub delay: f64,
}

fn one() -> f64 {
    1.0
}

/// Ground-truth DAG and sampling parameters for a synthetic log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub activities: Vec<String>,
    pub edges: Vec<SyntheticEdge>,
    pub noise: Noise,
    /// Scale of the independent uniform spread of root activities.
    #[serde(default = "default_root_spread")]
    pub root_spread: f64,
    pub traces: usize,
    /// Probability, per edge and trace, that the endpoint timestamps are swapped.
    #[serde(default)]
    pub flip_rate: f64,
    pub seed: u64,
    /// Epoch milliseconds of time zero.
    #[serde(default = "default_base")]
    pub base_time: i64,
    /// Milliseconds per time unit.
    #[serde(default = "default_unit")]
    pub unit_ms: i64,
}

fn default_root_spread() -> f64 {
    10.0
}
fn default_base() -> i64 {
    1_700_000_000_000
}
fn default_unit() -> i64 {
    1000
}

impl SyntheticSpec {
    fn with_edges(names: &[&str], edges: Vec<SyntheticEdge>, traces: usize, seed: u64) -> Self {
        SyntheticSpec {
            activities: names.iter().map(|s| s.to_string()).collect(),
            edges,
            noise: Noise::Uniform { scale: 10.0 },
            root_spread: default_root_spread(),
            traces,
            flip_rate: 0.0,
            seed,
            base_time: default_base(),
            unit_ms: default_unit(),
        }
    }

    fn edge(from: &str, to: &str, delay: f64) -> SyntheticEdge {
        SyntheticEdge {
            from: from.into(),
            to: to.into(),
            weight: 1.0,
            delay,
        }
    }

    /// names[0] → names[1] → …, delays 5, 2, 5, 2, …
    pub fn chain(names: &[&str], traces: usize, seed: u64) -> Self {
        let edges = names
            .windows(2)
            .enumerate()
            .map(|(i, w)| Self::edge(w[0], w[1], if i % 2 == 0 { 5.0 } else { 2.0 }))
            .collect();
        Self::with_edges(names, edges, traces, seed)
    }

    /// names[0] → {names[1], names[2]} → names[3].
    pub fn diamond(names: [&str; 4], traces: usize, seed: u64) -> Self {
        let [a, b, c, d] = names;
        let edges = vec![
            Self::edge(a, b, 5.0),
            Self::edge(a, c, 3.0),
            Self::edge(b, d, 2.0),
            Self::edge(c, d, 4.0),
        ];
        Self::with_edges(&names, edges, traces, seed)
    }

    /// A random DAG over `names` (each forward pair kept with probability
    /// `density` under a random order), with random weights and delays. The DAG
    /// itself is drawn from `seed`, as is the log later.
    pub fn random_dag(names: &[&str], density: f64, traces: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x05ee_dda6);
        let mut order: Vec<&str> = names.to_vec();
        order.shuffle(&mut rng);
        let mut edges = Vec::new();
        for i in 0..order.len() {
            for j in i + 1..order.len() {
                if rng.gen_bool(density) {
                    edges.push(SyntheticEdge {
                        from: order[i].into(),
                        to: order[j].into(),
                        weight: rng.gen_range(1.0..1.5),
                        delay: rng.gen_range(1.0..6.0),
                    });
                }
            }
        }
        Self::with_edges(names, edges, traces, seed)
    }

    pub fn with_noise(mut self, noise: Noise) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_flip_rate(mut self, rate: f64) -> Self {
        self.flip_rate = rate;
        self
    }

    pub fn ground_truth(&self) -> Result<CxGraph, VerifyError> {
        CxGraph::from_edges(
            self.activities.iter().map(String::as_str),
            self.edges.iter().map(|e| (e.from.as_str(), e.to.as_str())),
        )
        .map_err(|e| VerifyError::InvalidSpec(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), VerifyError> {
        let invalid = |m: String| Err(VerifyError::InvalidSpec(m));
        let names: BTreeSet<&String> = self.activities.iter().collect();
        if names.len() != self.activities.len() {
            return invalid("duplicate activity names".into());
        }
        if self.activities.iter().any(String::is_empty) {
            return invalid("empty activity name".into());
        }
        for e in &self.edges {
            if !(e.weight.is_finite() && e.weight > 0.0 && e.delay.is_finite() && e.delay >= 0.0) {
                return invalid(format!("edge {} -> {} needs a positive weight and non-negative delay", e.from, e.to));
            }
        }
        let scale = self.noise.scale();
        if !(scale.is_finite() && scale > 0.0) {
            return invalid(format!("noise scale {scale} must be positive"));
        }
        if !(self.root_spread.is_finite() && self.root_spread > 0.0) {
            return invalid(format!("root_spread {} must be positive", self.root_spread));
        }
        if !(0.0..=1.0).contains(&self.flip_rate) {
            return invalid(format!("flip_rate {} outside [0, 1]", self.flip_rate));
        }
        if self.unit_ms <= 0 {
            return invalid("unit_ms must be positive".into());
        }
        self.ground_truth().map(|_| ())
    }
}

/// Samples a log from `spec`. Case ids are zero-padded trace numbers.
pub fn gen_synthetic_log(spec: &SyntheticSpec) -> Result<EventLog, VerifyError> {
    spec.validate()?;
    let truth = spec.ground_truth()?;
    let order = truth.topological_order().expect("validated acyclic");
    let index = |n: &str| spec.activities.iter().position(|a| a == n).expect("known activity");
    let order: Vec<usize> = order.iter().map(|n| index(n)).collect();
    let parents: Vec<Vec<(usize, f64, f64)>> = (0..spec.activities.len())
        .map(|c| {
            spec.edges
                .iter()
                .filter(|e| index(&e.to) == c)
                .map(|e| (index(&e.from), e.weight, e.delay))
                .collect()
        })
        .collect();
    let edge_idx: Vec<(usize, usize)> = spec.edges.iter().map(|e| (index(&e.from), index(&e.to))).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let width = spec.traces.max(1).to_string().len();
    let mut events = Vec::with_capacity(spec.traces * spec.activities.len());
    let mut t = vec![0.0f64; spec.activities.len()];
    for case in 0..spec.traces {
        for &c in &order {
            t[c] = if parents[c].is_empty() {
                spec.root_spread * rng.gen::<f64>()
            } else {
                parents[c].iter().map(|&(p, w, d)| w * t[p] + d).sum::<f64>() + spec.noise.sample(&mut rng)
            };
        }
        if spec.flip_rate > 0.0 {
            for &(a, b) in &edge_idx {
                if rng.gen_bool(spec.flip_rate) {
                    t.swap(a, b);
                }
            }
        }
        let case_id = format!("{case:0width$}");
        for (c, name) in spec.activities.iter().enumerate() {
            let ts = spec.base_time + (t[c] * spec.unit_ms as f64).round() as i64;
            events.push(ActivityEvent::new(case_id.clone(), name.clone(), ts));
        }
    }
    Ok(EventLog::from_events(events).expect("generated events are valid"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discovery::{build_blacklist, precedence_stats};
    use crate::event_log::partition;

    /// p_{B→A} counted directly on the events.
    fn p_before(log: &EventLog, b: &str, a: &str) -> f64 {
        let hits = log
            .traces()
            .iter()
            .filter(|t| {
                let find = |n: &str| t.events.iter().find(|e| e.name == n).unwrap().timestamp;
                find(b) < find(a)
            })
            .count();
        hits as f64 / log.len() as f64
    }

    #[test]
    fn chain_without_flips_is_strictly_ordered() {
        let log = gen_synthetic_log(&SyntheticSpec::chain(&["A", "B", "C"], 2000, 7)).unwrap();
        assert_eq!(log.len(), 2000);
        assert_eq!(p_before(&log, "B", "A"), 0.0);
        let parts = partition(&log, None, false).unwrap();
        assert_eq!(precedence_stats(&parts[0]).proportion("B", "A"), Some(0.0));
    }

    #[test]
    fn flips_produce_matching_reversal_rate() {
        let spec = SyntheticSpec::chain(&["A", "B", "C"], 2000, 7).with_flip_rate(0.02);
        let log = gen_synthetic_log(&spec).unwrap();
        let p = p_before(&log, "B", "A");
        // Binomial(2000, 0.02): sd ≈ 0.0031.
        assert!((p - 0.02).abs() < 0.01, "p_BA = {p}");
        let parts = partition(&log, None, false).unwrap();
        let stats = precedence_stats(&parts[0]);
        assert_eq!(stats.proportion("B", "A"), Some(p));
        assert!(build_blacklist(&stats, 0.05).contains("B", "A"));
    }

    #[test]
    fn reproducible_from_seed() {
        let spec = SyntheticSpec::diamond(["A", "B", "C", "D"], 50, 3).with_noise(Noise::Laplace { scale: 2.0 });
        let a = gen_synthetic_log(&spec).unwrap();
        let b = gen_synthetic_log(&spec).unwrap();
        assert_eq!(a, b);
        let other = gen_synthetic_log(&SyntheticSpec { seed: 4, ..spec }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut spec = SyntheticSpec::chain(&["A", "B"], 10, 1);
        spec.edges.push(SyntheticSpec::edge("B", "A", 1.0));
        assert!(matches!(gen_synthetic_log(&spec), Err(VerifyError::InvalidSpec(_))));
        let spec = SyntheticSpec::chain(&["A", "B"], 10, 1).with_flip_rate(2.0);
        assert!(spec.validate().is_err());
    }

    #[test]
    fn json_round_trip() {
        let spec = SyntheticSpec::random_dag(&["A", "B", "C", "D", "E"], 0.5, 100, 9);
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<SyntheticSpec>(&text).unwrap(), spec);
    }
}
