//! Per-partition causal discovery.
//!
//! Pairwise temporal-precedence proportions feed a blacklist of edges that
//! oppose the dominant order; a pluggable backend (DirectLiNGAM by default)
//! then estimates a DAG over the partition's activity timestamps.

mod lingam;

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cx_model::{CxGraph, GraphError};
use crate::event_log::{Partition, RepeatPolicy, TimestampTable};

pub use self::lingam::{causal_order, entropy, negentropy, DirectLingam};

/// Below this negentropy (nats) a column is treated as indistinguishable from Gaussian.
const NEAR_GAUSSIAN: f64 = 0.002;

#[derive(Debug, Error)]
pub enum DiscoveryError {
    #[error("invalid discovery configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown discovery backend {0:?}")]
    UnknownBackend(String),
    #[error("partition {partition} has {traces} traces, fewer than the minimum {min}")]
    TooFewTraces { partition: String, traces: usize, min: usize },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("backend {backend} broke its contract: {detail}")]
    Contract { backend: String, detail: String },
    #[error("failed to build worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Proportions of traces in which one activity strictly precedes another.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecedenceStats {
    activities: Vec<String>,
    traces: usize,
    /// `before[i][j]`: traces where activity i is strictly earlier than j.
    before: Vec<Vec<usize>>,
}

impl PrecedenceStats {
    pub fn from_table(table: &TimestampTable) -> Self {
        Self::from_rows(&table.activities, table.rows.iter())
    }

    /// Stats over rows whose columns follow `activities` (sorted).
    pub fn from_rows<'a>(activities: &[String], rows: impl Iterator<Item = &'a Vec<i64>>) -> Self {
        let p = activities.len();
        let mut before = vec![vec![0usize; p]; p];
        let mut traces = 0;
        for row in rows {
            traces += 1;
            for i in 0..p {
                for j in 0..p {
                    if row[i] < row[j] {
                        before[i][j] += 1;
                    }
                }
            }
        }
        PrecedenceStats {
            activities: activities.to_vec(),
            traces,
            before,
        }
    }

    pub fn activities(&self) -> &[String] {
        &self.activities
    }

    pub fn traces(&self) -> usize {
        self.traces
    }

    /// p_{before→after}; `None` for unknown activities or an empty partition.
    pub fn proportion(&self, before: &str, after: &str) -> Option<f64> {
        let i = self.index(before)?;
        let j = self.index(after)?;
        (self.traces > 0).then(|| self.before[i][j] as f64 / self.traces as f64)
    }

    pub fn count(&self, before: &str, after: &str) -> Option<usize> {
        Some(self.before[self.index(before)?][self.index(after)?])
    }

    fn index(&self, name: &str) -> Option<usize> {
        self.activities.binary_search_by(|a| a.as_str().cmp(name)).ok()
    }

    /// All ordered pairs `(before, after, proportion)` of distinct activities.
    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str, f64)> + '_ {
        let n = self.traces.max(1) as f64;
        self.activities.iter().enumerate().flat_map(move |(i, a)| {
            self.activities
                .iter()
                .enumerate()
                .filter(move |(j, _)| *j != i)
                .map(move |(j, b)| (a.as_str(), b.as_str(), self.before[i][j] as f64 / n))
        })
    }
}

/// Precedence proportions over a partition's traces (first occurrence of repeats).
pub fn precedence_stats(partition: &Partition) -> PrecedenceStats {
    PrecedenceStats::from_table(&partition.timestamp_table(RepeatPolicy::First))
}

/// Forbidden `(cause, effect)` edges.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Blacklist(BTreeSet<(String, String)>);

impl Blacklist {
    pub fn contains(&self, cause: &str, effect: &str) -> bool {
        self.0.contains(&(cause.to_string(), effect.to_string()))
    }

    pub fn insert(&mut self, cause: impl Into<String>, effect: impl Into<String>) {
        self.0.insert((cause.into(), effect.into()));
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.0.iter().map(|(a, b)| (a.as_str(), b.as_str()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Blacklists (B, A) whenever p_{B→A} ≤ theta.
pub fn build_blacklist(stats: &PrecedenceStats, theta: f64) -> Blacklist {
    let mut out = Blacklist::default();
    for (b, a, p) in stats.pairs() {
        if p <= theta {
            out.insert(b, a);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiscoveryConfig {
    pub theta: f64,
    pub coeff_prune: f64,
    pub min_traces: usize,
    pub backend: String,
    pub repeat_policy: RepeatPolicy,
    /// Subtract each trace's first timestamp before standardizing.
    pub anchor: bool,
    /// Leave traces that order a blacklisted pair the minority way out of
    /// the fitted data.
    pub drop_noisy_traces: bool,
    /// Upper bound on the share of traces the noise filter may remove. Past
    /// it, the disagreement is treated as structure rather than noise.
    pub max_drop_fraction: f64,
}

impl Default for DiscoveryConfig {
    fn default() -> Self {
        DiscoveryConfig {
            theta: 0.05,
            coeff_prune: 0.05,
            min_traces: 10,
            backend: "direct-lingam".into(),
            repeat_policy: RepeatPolicy::First,
            anchor: false,
            drop_noisy_traces: true,
            max_drop_fraction: 0.5,
        }
    }
}

impl DiscoveryConfig {
    pub fn validate(&self) -> Result<(), DiscoveryError> {
        if !(0.0..=0.5).contains(&self.theta) {
            return Err(DiscoveryError::InvalidConfig(format!("theta {} outside [0, 0.5]", self.theta)));
        }
        if !(self.coeff_prune >= 0.0 && self.coeff_prune.is_finite()) {
            return Err(DiscoveryError::InvalidConfig(format!(
                "coeff_prune {} must be a finite non-negative number",
                self.coeff_prune
            )));
        }
        if !(0.0..=1.0).contains(&self.max_drop_fraction) {
            return Err(DiscoveryError::InvalidConfig(format!(
                "max_drop_fraction {} outside [0, 1]",
                self.max_drop_fraction
            )));
        }
        backend_by_name(&self.backend).map(|_| ())
    }
}

/// Data handed to a backend. Columns are raw (optionally anchored) timestamps
/// of the non-degenerate activities.
#[derive(Debug)]
pub struct BackendInput<'a> {
    pub activities: &'a [String],
    pub columns: &'a [Vec<f64>],
    /// `forbidden[i][j]`: the edge i → j must not be emitted.
    pub forbidden: &'a [Vec<bool>],
    pub coeff_prune: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatedEdge {
    pub cause: usize,
    pub effect: usize,
    pub coefficient: f64,
}

/// A causal discovery method. Output must be acyclic and avoid forbidden edges;
/// [`discover_cx_with`] checks both.
pub trait DiscoveryBackend: Send + Sync {
    fn name(&self) -> &str;
    fn discover(&self, input: &BackendInput<'_>) -> Result<Vec<EstimatedEdge>, DiscoveryError>;
}

pub fn backend_by_name(name: &str) -> Result<Box<dyn DiscoveryBackend>, DiscoveryError> {
    match name {
        "direct-lingam" | "directlingam" => Ok(Box::new(DirectLingam)),
        other => Err(DiscoveryError::UnknownBackend(other.to_string())),
    }
}

#[derive(Debug, Clone)]
pub struct Discovery {
    pub graph: CxGraph,
    pub blacklist: Blacklist,
    pub warnings: Vec<String>,
}

/// Discovers the CX graph of one partition with the configured backend.
pub fn discover_cx(partition: &Partition, config: &DiscoveryConfig) -> Result<Discovery, DiscoveryError> {
    config.validate()?;
    let backend = backend_by_name(&config.backend)?;
    discover_cx_with(partition, config, backend.as_ref())
}

pub fn discover_cx_with(
    partition: &Partition,
    config: &DiscoveryConfig,
    backend: &dyn DiscoveryBackend,
) -> Result<Discovery, DiscoveryError> {
    let mut graph = CxGraph::new();
    for a in &partition.activity_set {
        graph.add_node(a.clone());
    }
    if partition.activity_set.len() < 2 {
        return Ok(Discovery {
            graph,
            blacklist: Blacklist::default(),
            warnings: Vec::new(),
        });
    }
    let table = partition.timestamp_table(config.repeat_policy);
    let mut warnings = Vec::new();
    if !table.repeated_cases.is_empty() {
        warnings.push(format!(
            "{}: {} traces repeat an activity (policy {:?})",
            partition.label(),
            table.repeated_cases.len(),
            config.repeat_policy
        ));
    }
    if table.rows.len() < config.min_traces {
        return Err(DiscoveryError::TooFewTraces {
            partition: partition.label(),
            traces: table.rows.len(),
            min: config.min_traces,
        });
    }
    let stats = PrecedenceStats::from_table(&table);
    let blacklist = build_blacklist(&stats, config.theta);

    let (rows, enforced) = if config.drop_noisy_traces {
        drop_noisy_traces(&table, &blacklist, config, &partition.label(), &mut warnings)
    } else {
        (table.rows.iter().collect(), blacklist.clone())
    };
    let mut columns: Vec<Vec<f64>> = (0..table.activities.len())
        .map(|c| rows.iter().map(|r| r[c] as f64).collect())
        .collect();
    if config.anchor {
        for (r, row) in rows.iter().enumerate() {
            let first = *row.iter().min().expect("at least two activities") as f64;
            for col in columns.iter_mut() {
                col[r] -= first;
            }
        }
    }
    let mut active = Vec::new();
    for (c, col) in columns.iter().enumerate() {
        if col.iter().all(|v| *v == col[0]) {
            warnings.push(format!(
                "{}: activity {} has zero variance; its edges are left undetermined",
                partition.label(),
                table.activities[c]
            ));
        } else {
            active.push(c);
        }
    }
    if active.len() >= 2 && active.iter().all(|&c| negentropy(&columns[c]) < NEAR_GAUSSIAN) {
        warnings.push(format!(
            "{}: every timestamp column looks Gaussian; edge directions may not be identifiable",
            partition.label()
        ));
    }
    let names: Vec<String> = active.iter().map(|&c| table.activities[c].clone()).collect();
    let cols: Vec<Vec<f64>> = active.iter().map(|&c| std::mem::take(&mut columns[c])).collect();
    let forbidden: Vec<Vec<bool>> = names
        .iter()
        .map(|a| names.iter().map(|b| enforced.contains(a, b)).collect())
        .collect();

    if names.len() >= 2 {
        let input = BackendInput {
            activities: &names,
            columns: &cols,
            forbidden: &forbidden,
            coeff_prune: config.coeff_prune,
        };
        for e in backend.discover(&input)? {
            let (cause, effect) = (&names[e.cause], &names[e.effect]);
            if forbidden[e.cause][e.effect] {
                return Err(DiscoveryError::Contract {
                    backend: backend.name().to_string(),
                    detail: format!("emitted blacklisted edge {cause} -> {effect}"),
                });
            }
            graph.add_edge(cause, effect, Some(e.coefficient)).map_err(|err| DiscoveryError::Contract {
                backend: backend.name().to_string(),
                detail: err.to_string(),
            })?;
        }
    }
    for w in &warnings {
        warn!("{w}");
    }
    Ok(Discovery {
        graph,
        blacklist: enforced,
        warnings,
    })
}

/// Repeatedly removes traces that order a blacklisted pair the minority way,
/// recomputing the blacklist on the remaining traces, until no trace is
/// removed. Returns the kept rows and every pair blacklisted along the way.
fn drop_noisy_traces<'t>(
    table: &'t TimestampTable,
    blacklist: &Blacklist,
    config: &DiscoveryConfig,
    label: &str,
    warnings: &mut Vec<String>,
) -> (Vec<&'t Vec<i64>>, Blacklist) {
    let index = |name: &str| table.activities.binary_search_by(|a| a.as_str().cmp(name)).expect("known activity");
    let mut rows: Vec<&Vec<i64>> = table.rows.iter().collect();
    let mut enforced = blacklist.clone();
    let total = table.rows.len();
    let floor = config
        .min_traces
        .max(2)
        .max(total - (total as f64 * config.max_drop_fraction).floor() as usize);
    loop {
        let pairs: Vec<(usize, usize)> = enforced.iter().map(|(b, a)| (index(b), index(a))).collect();
        let clean: Vec<&Vec<i64>> = rows
            .iter()
            .copied()
            .filter(|r| pairs.iter().all(|&(b, a)| r[b] >= r[a]))
            .collect();
        if clean.len() == rows.len() {
            break;
        }
        if clean.len() < floor {
            warnings.push(format!(
                "{label}: removing traces against the dominant order would leave {} of {total}; stopped at {}",
                clean.len(),
                rows.len()
            ));
            break;
        }
        rows = clean;
        let stats = PrecedenceStats::from_rows(&table.activities, rows.iter().copied());
        for (b, a) in build_blacklist(&stats, config.theta).iter() {
            enforced.insert(b, a);
        }
    }
    let dropped = table.rows.len() - rows.len();
    if dropped > 0 {
        warnings.push(format!("{label}: {dropped} traces against the dominant order left out of the fit"));
    }
    (rows, enforced)
}

/// Discovery result of one partition inside a batch.
#[derive(Debug, Clone)]
pub struct PartitionOutcome {
    pub label: String,
    pub activity_set: BTreeSet<String>,
    pub traces: usize,
    /// Node-only when the partition was skipped.
    pub graph: CxGraph,
    pub blacklist: Blacklist,
    pub skipped: Option<String>,
    pub warnings: Vec<String>,
    pub elapsed: Duration,
}

/// Runs discovery on every partition in parallel. Partitions with too few
/// traces are kept as node-only graphs and marked skipped.
pub fn discover_partitions(
    partitions: &[Partition],
    config: &DiscoveryConfig,
    jobs: Option<usize>,
) -> Result<Vec<PartitionOutcome>, DiscoveryError> {
    config.validate()?;
    let backend = backend_by_name(&config.backend)?;
    let run = |p: &Partition| -> Result<PartitionOutcome, DiscoveryError> {
        let start = Instant::now();
        let result = discover_cx_with(p, config, backend.as_ref());
        let elapsed = start.elapsed();
        let base = PartitionOutcome {
            label: p.label(),
            activity_set: p.activity_set.clone(),
            traces: p.len(),
            graph: CxGraph::new(),
            blacklist: Blacklist::default(),
            skipped: None,
            warnings: Vec::new(),
            elapsed,
        };
        match result {
            Ok(d) => Ok(PartitionOutcome {
                graph: d.graph,
                blacklist: d.blacklist,
                warnings: d.warnings,
                ..base
            }),
            Err(e @ DiscoveryError::TooFewTraces { .. }) => {
                warn!("skipping {e}");
                let mut graph = CxGraph::new();
                for a in &p.activity_set {
                    graph.add_node(a.clone());
                }
                Ok(PartitionOutcome {
                    graph,
                    skipped: Some(e.to_string()),
                    ..base
                })
            }
            Err(e) => Err(e),
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| DiscoveryError::Pool(e.to_string()))?;
    pool.install(|| partitions.par_iter().map(run).collect())
}

/// Edge counts keyed by (cause, effect) across outcomes; convenience for reports.
pub fn edge_frequencies(outcomes: &[PartitionOutcome]) -> BTreeMap<(String, String), usize> {
    let mut out = BTreeMap::new();
    for o in outcomes {
        for (a, b) in o.graph.edges() {
            *out.entry((a.to_string(), b.to_string())).or_insert(0) += 1;
        }
    }
    out
}
