use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use flate2::read::GzDecoder;
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use serde::{Deserialize, Serialize};

use super::timestamp::parse_iso8601;
use super::{ActivityEvent, EventLog, EventLogError};

const NAME_KEY: &str = "concept:name";
const TIME_KEY: &str = "time:timestamp";
const LIFECYCLE_KEY: &str = "lifecycle:transition";
const ATTRIBUTE_TAGS: &[&str] = &["string", "date", "int", "float", "boolean", "id"];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LifecycleFilter {
    /// Keep events whose lifecycle transition is `complete`, plus events that
    /// carry no lifecycle attribute at all.
    #[default]
    Complete,
    All,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct XesConfig {
    #[serde(default)]
    pub lifecycle: LifecycleFilter,
}

#[derive(Default)]
struct PendingTrace {
    index: usize,
    case_id: Option<String>,
    events: Vec<BTreeMap<String, String>>,
}

/// Reads the XES subset used by process-mining event logs: `<trace>` elements
/// with a `concept:name` case id, holding `<event>` elements with
/// `concept:name` and `time:timestamp`. Other flat event attributes become
/// payload; nested attributes, globals, extensions and classifiers are skipped.
pub fn parse_xes<R: BufRead>(source: R, config: &XesConfig) -> Result<EventLog, EventLogError> {
    let mut reader = Reader::from_reader(source);
    reader.config_mut().trim_text(true);
    let mut buf = Vec::new();
    let mut stack: Vec<String> = Vec::new();
    let mut seen_log = false;
    let mut trace_count = 0usize;
    let mut current: Option<PendingTrace> = None;
    let mut event_attrs: Option<BTreeMap<String, String>> = None;
    let mut events = Vec::new();

    loop {
        let ev = reader
            .read_event_into(&mut buf)
            .map_err(|e| EventLogError::Xml(format!("at byte {}: {e}", reader.buffer_position())))?;
        match ev {
            Event::Start(ref e) | Event::Empty(ref e) => {
                let is_empty = matches!(ev, Event::Empty(_));
                let tag = local_name(e);
                let parent = stack.last().map(String::as_str);
                match (tag.as_str(), parent) {
                    ("log", None) => seen_log = true,
                    ("trace", Some("log")) => {
                        current = Some(PendingTrace {
                            index: trace_count,
                            ..PendingTrace::default()
                        });
                        trace_count += 1;
                    }
                    ("event", Some("trace")) => event_attrs = Some(BTreeMap::new()),
                    (t, Some("event")) if ATTRIBUTE_TAGS.contains(&t) => {
                        if let (Some(attrs), Some((k, v))) = (event_attrs.as_mut(), key_value(e)?) {
                            attrs.insert(k, v);
                        }
                    }
                    (t, Some("trace")) if ATTRIBUTE_TAGS.contains(&t) => {
                        if let Some((k, v)) = key_value(e)? {
                            if k == NAME_KEY {
                                if let Some(trace) = current.as_mut() {
                                    trace.case_id = Some(v);
                                }
                            }
                        }
                    }
                    _ => {}
                }
                if is_empty {
                    close(&tag, &mut current, &mut event_attrs, &mut events, config)?;
                } else {
                    stack.push(tag);
                }
            }
            Event::End(_) => {
                let tag = stack
                    .pop()
                    .ok_or_else(|| EventLogError::Xml("unbalanced closing tag".into()))?;
                close(&tag, &mut current, &mut event_attrs, &mut events, config)?;
            }
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }
    if !stack.is_empty() {
        return Err(EventLogError::Xml(format!("unexpected end of document inside <{}>", stack.join("><"))));
    }
    if !seen_log {
        return Err(EventLogError::Xml("no <log> root element".into()));
    }
    EventLog::from_events(events)
}

fn close(
    tag: &str,
    current: &mut Option<PendingTrace>,
    event_attrs: &mut Option<BTreeMap<String, String>>,
    events: &mut Vec<ActivityEvent>,
    config: &XesConfig,
) -> Result<(), EventLogError> {
    match tag {
        "event" => {
            if let (Some(attrs), Some(trace)) = (event_attrs.take(), current.as_mut()) {
                trace.events.push(attrs);
            }
        }
        "trace" => {
            if let Some(trace) = current.take() {
                finish_trace(trace, events, config)?;
            }
        }
        _ => {}
    }
    Ok(())
}

fn finish_trace(
    trace: PendingTrace,
    out: &mut Vec<ActivityEvent>,
    config: &XesConfig,
) -> Result<(), EventLogError> {
    let case_id = trace.case_id.ok_or_else(|| EventLogError::XesTrace {
        trace: trace.index,
        message: format!("missing {NAME_KEY}"),
    })?;
    for (i, mut attrs) in trace.events.into_iter().enumerate() {
        let err = |message: String| EventLogError::XesEvent {
            trace: trace.index,
            event: i,
            message,
        };
        let name = attrs
            .remove(NAME_KEY)
            .filter(|n| !n.is_empty())
            .ok_or_else(|| err(format!("missing {NAME_KEY}")))?;
        let raw_time = attrs.remove(TIME_KEY).ok_or_else(|| err(format!("missing {TIME_KEY}")))?;
        let timestamp = parse_iso8601(&raw_time).ok_or_else(|| err(format!("cannot parse timestamp {raw_time:?}")))?;
        if config.lifecycle == LifecycleFilter::Complete {
            if let Some(lc) = attrs.get(LIFECYCLE_KEY) {
                if !lc.eq_ignore_ascii_case("complete") {
                    continue;
                }
            }
        }
        out.push(ActivityEvent {
            case_id: case_id.clone(),
            name,
            timestamp,
            payload: attrs,
        });
    }
    Ok(())
}

fn local_name(e: &BytesStart<'_>) -> String {
    String::from_utf8_lossy(e.local_name().as_ref()).into_owned()
}

fn key_value(e: &BytesStart<'_>) -> Result<Option<(String, String)>, EventLogError> {
    let mut key = None;
    let mut value = None;
    for attr in e.attributes() {
        let attr = attr.map_err(|err| EventLogError::Xml(err.to_string()))?;
        let text = attr
            .unescape_value()
            .map_err(|err| EventLogError::Xml(err.to_string()))?
            .into_owned();
        match attr.key.as_ref() {
            b"key" => key = Some(text),
            b"value" => value = Some(text),
            _ => {}
        }
    }
    Ok(key.zip(value))
}

/// Reads a `.xes` or gzip-compressed `.xes.gz` file.
pub fn parse_xes_path(path: &Path, config: &XesConfig) -> Result<EventLog, EventLogError> {
    let file = File::open(path)?;
    let gz = path
        .extension()
        .map(|e| e.eq_ignore_ascii_case("gz"))
        .unwrap_or(false);
    if gz {
        parse_xes(BufReader::new(GzDecoder::new(file)), config)
    } else {
        parse_xes(BufReader::new(file), config)
    }
}
