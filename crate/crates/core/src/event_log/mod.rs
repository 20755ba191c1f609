//! Event-log model: traces of timestamped activity executions, grouped into
//! variants (same ordered sequence) and partitions (same activity set).

mod csv;
mod timestamp;
mod xes;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use self::csv::{parse_csv, parse_csv_path, write_csv, CsvSchema, TimestampFormat};
pub use self::timestamp::{format_iso8601, parse_iso8601};
pub use self::xes::{parse_xes, parse_xes_path, LifecycleFilter, XesConfig};

/// Milliseconds since the Unix epoch.
pub type Timestamp = i64;

#[derive(Debug, Error)]
pub enum EventLogError {
    #[error("line {line}: {message}")]
    MalformedRow { line: u64, message: String },
    #[error("line {line}: cannot parse timestamp {value:?}")]
    Timestamp { line: u64, value: String },
    #[error("missing required column {0:?}")]
    MissingColumn(String),
    #[error("malformed XES document: {0}")]
    Xml(String),
    #[error("trace {trace}, event {event}: {message}")]
    XesEvent {
        trace: usize,
        event: usize,
        message: String,
    },
    #[error("trace {trace}: {message}")]
    XesTrace { trace: usize, message: String },
    #[error("selected variant <{0}> does not occur in the log")]
    UnknownVariant(String),
    #[error("activity name must not be empty (case {0:?})")]
    EmptyActivity(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivityEvent {
    pub case_id: String,
    pub name: String,
    pub timestamp: Timestamp,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub payload: BTreeMap<String, String>,
}

impl ActivityEvent {
    pub fn new(case_id: impl Into<String>, name: impl Into<String>, timestamp: Timestamp) -> Self {
        ActivityEvent {
            case_id: case_id.into(),
            name: name.into(),
            timestamp,
            payload: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub case_id: String,
    pub events: Vec<ActivityEvent>,
}

impl Trace {
    /// Activity names in execution order.
    pub fn sequence(&self) -> Vec<String> {
        self.events.iter().map(|e| e.name.clone()).collect()
    }

    pub fn activity_set(&self) -> BTreeSet<String> {
        self.events.iter().map(|e| e.name.clone()).collect()
    }

    /// True when some activity occurs more than once.
    pub fn has_repeats(&self) -> bool {
        let mut seen = BTreeSet::new();
        !self.events.iter().all(|e| seen.insert(e.name.as_str()))
    }
}

/// A finite set of traces with unique case ids.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventLog {
    traces: Vec<Trace>,
    alphabet: BTreeSet<String>,
}

impl EventLog {
    /// Groups events by case id. Trace order follows the first appearance of each
    /// case; events inside a trace are stably sorted by timestamp.
    pub fn from_events(events: impl IntoIterator<Item = ActivityEvent>) -> Result<Self, EventLogError> {
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut traces: Vec<Trace> = Vec::new();
        for event in events {
            if event.name.is_empty() {
                return Err(EventLogError::EmptyActivity(event.case_id));
            }
            let slot = *index.entry(event.case_id.clone()).or_insert_with(|| {
                traces.push(Trace {
                    case_id: event.case_id.clone(),
                    events: Vec::new(),
                });
                traces.len() - 1
            });
            traces[slot].events.push(event);
        }
        Ok(Self::from_traces_unchecked(traces))
    }

    fn from_traces_unchecked(mut traces: Vec<Trace>) -> Self {
        let mut alphabet = BTreeSet::new();
        for trace in &mut traces {
            trace.events.sort_by_key(|e| e.timestamp);
            alphabet.extend(trace.events.iter().map(|e| e.name.clone()));
        }
        EventLog { traces, alphabet }
    }

    pub fn traces(&self) -> &[Trace] {
        &self.traces
    }

    pub fn alphabet(&self) -> &BTreeSet<String> {
        &self.alphabet
    }

    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    pub fn event_count(&self) -> usize {
        self.traces.iter().map(|t| t.events.len()).sum()
    }

    pub fn trace(&self, case_id: &str) -> Option<&Trace> {
        self.traces.iter().find(|t| t.case_id == case_id)
    }
}

/// Traces sharing one ordered activity sequence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Variant {
    pub sequence: Vec<String>,
    pub case_ids: BTreeSet<String>,
}

impl Variant {
    pub fn activity_set(&self) -> BTreeSet<String> {
        self.sequence.iter().cloned().collect()
    }
}

/// Variants of `log`, sorted lexicographically by sequence.
pub fn extract_variants(log: &EventLog) -> Vec<Variant> {
    let mut by_sequence: BTreeMap<Vec<String>, BTreeSet<String>> = BTreeMap::new();
    for trace in log.traces() {
        by_sequence
            .entry(trace.sequence())
            .or_default()
            .insert(trace.case_id.clone());
    }
    by_sequence
        .into_iter()
        .map(|(sequence, case_ids)| Variant { sequence, case_ids })
        .collect()
}

/// Traces sharing one activity set (or one variant, when splitting by variants).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub activity_set: BTreeSet<String>,
    pub case_ids: BTreeSet<String>,
    /// Member traces, sorted by case id.
    pub traces: Vec<Trace>,
}

impl Partition {
    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    /// Short label such as `{A,B,C}`.
    pub fn label(&self) -> String {
        let names: Vec<&str> = self.activity_set.iter().map(String::as_str).collect();
        format!("{{{}}}", names.join(","))
    }

    /// Rectangular timestamp table (rows = traces, columns = `activity_set`).
    pub fn timestamp_table(&self, policy: RepeatPolicy) -> TimestampTable {
        let activities: Vec<String> = self.activity_set.iter().cloned().collect();
        let column: HashMap<&str, usize> = activities
            .iter()
            .enumerate()
            .map(|(i, a)| (a.as_str(), i))
            .collect();
        let mut rows = Vec::with_capacity(self.traces.len());
        let mut case_ids = Vec::with_capacity(self.traces.len());
        let mut flagged = Vec::new();
        for trace in &self.traces {
            let repeated = trace.has_repeats();
            if repeated {
                flagged.push(trace.case_id.clone());
                if policy == RepeatPolicy::DropTrace {
                    continue;
                }
            }
            let mut row: Vec<Option<Timestamp>> = vec![None; activities.len()];
            for event in &trace.events {
                let Some(&c) = column.get(event.name.as_str()) else {
                    continue;
                };
                match (policy, row[c]) {
                    (RepeatPolicy::Last, _) | (_, None) => row[c] = Some(event.timestamp),
                    _ => {}
                }
            }
            // A trace missing a column cannot belong here; the partition invariant rules it out.
            let row: Vec<Timestamp> = row.into_iter().map(|t| t.unwrap_or_default()).collect();
            rows.push(row);
            case_ids.push(trace.case_id.clone());
        }
        TimestampTable {
            activities,
            case_ids,
            rows,
            repeated_cases: flagged,
        }
    }
}

/// How an activity occurring several times in one trace is reduced to one timestamp.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepeatPolicy {
    #[default]
    First,
    Last,
    DropTrace,
}

impl std::str::FromStr for RepeatPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "first" => Ok(RepeatPolicy::First),
            "last" => Ok(RepeatPolicy::Last),
            "drop_trace" | "drop-trace" => Ok(RepeatPolicy::DropTrace),
            other => Err(format!("unknown repeat policy {other:?} (expected first|last|drop_trace)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimestampTable {
    pub activities: Vec<String>,
    pub case_ids: Vec<String>,
    pub rows: Vec<Vec<Timestamp>>,
    /// Traces that contained a repeated activity.
    pub repeated_cases: Vec<String>,
}

impl TimestampTable {
    pub fn column(&self, c: usize) -> impl Iterator<Item = Timestamp> + '_ {
        self.rows.iter().map(move |r| r[c])
    }
}

/// Splits the selected traces of `log` into partitions.
///
/// `selected` defaults to every variant of the log. With `split_by_variants`
/// each selected variant becomes its own partition; otherwise traces are grouped
/// by their unordered activity set. Output is sorted by activity set, then by
/// case ids, so it does not depend on trace order in the log.
pub fn partition(
    log: &EventLog,
    selected: Option<&[Variant]>,
    split_by_variants: bool,
) -> Result<Vec<Partition>, EventLogError> {
    let all = extract_variants(log);
    let chosen: Vec<Variant> = match selected {
        None => all,
        Some(selection) => {
            let by_sequence: BTreeMap<&Vec<String>, &Variant> =
                all.iter().map(|v| (&v.sequence, v)).collect();
            let mut chosen = BTreeMap::new();
            for wanted in selection {
                let found = by_sequence
                    .get(&wanted.sequence)
                    .ok_or_else(|| EventLogError::UnknownVariant(wanted.sequence.join(",")))?;
                chosen.insert(found.sequence.clone(), (*found).clone());
            }
            chosen.into_values().collect()
        }
    };

    let groups: Vec<(BTreeSet<String>, BTreeSet<String>)> = if split_by_variants {
        chosen
            .iter()
            .map(|v| (v.activity_set(), v.case_ids.clone()))
            .collect()
    } else {
        let mut by_set: BTreeMap<BTreeSet<String>, BTreeSet<String>> = BTreeMap::new();
        for v in &chosen {
            by_set
                .entry(v.activity_set())
                .or_default()
                .extend(v.case_ids.iter().cloned());
        }
        by_set.into_iter().collect()
    };

    let by_case: HashMap<&str, &Trace> = log
        .traces()
        .iter()
        .map(|t| (t.case_id.as_str(), t))
        .collect();
    let mut partitions: Vec<Partition> = groups
        .into_iter()
        .map(|(activity_set, case_ids)| Partition {
            traces: case_ids
                .iter()
                .map(|id| by_case[id.as_str()].clone())
                .collect(),
            activity_set,
            case_ids,
        })
        .collect();
    partitions.sort_by(|a, b| {
        (&a.activity_set, &a.case_ids).cmp(&(&b.activity_set, &b.case_ids))
    });
    Ok(partitions)
}
