use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::timestamp::{format_iso8601, parse_iso8601};
use super::{ActivityEvent, EventLog, EventLogError, Timestamp};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimestampFormat {
    #[default]
    Iso8601,
    EpochSeconds,
    EpochMillis,
}

impl std::str::FromStr for TimestampFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "iso8601" | "iso" => Ok(TimestampFormat::Iso8601),
            "epoch-seconds" | "epoch" | "seconds" => Ok(TimestampFormat::EpochSeconds),
            "epoch-millis" | "millis" => Ok(TimestampFormat::EpochMillis),
            other => Err(format!("unknown timestamp format {other:?}")),
        }
    }
}

/// Column names used to read a CSV event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CsvSchema {
    pub case_column: String,
    pub activity_column: String,
    pub timestamp_column: String,
    pub timestamp_format: TimestampFormat,
    /// Extra columns appended to the activity label (joined with `:`) when the
    /// activity name alone does not identify an activity.
    pub activity_key_columns: Vec<String>,
    pub delimiter: u8,
}

impl Default for CsvSchema {
    fn default() -> Self {
        CsvSchema {
            case_column: "case:concept:name".into(),
            activity_column: "concept:name".into(),
            timestamp_column: "time:timestamp".into(),
            timestamp_format: TimestampFormat::Iso8601,
            activity_key_columns: Vec::new(),
            delimiter: b',',
        }
    }
}

impl CsvSchema {
    fn parse_timestamp(&self, raw: &str) -> Option<Timestamp> {
        let raw = raw.trim();
        match self.timestamp_format {
            TimestampFormat::Iso8601 => parse_iso8601(raw),
            TimestampFormat::EpochMillis => raw
                .parse::<i64>()
                .ok()
                .or_else(|| raw.parse::<f64>().ok().filter(|v| v.is_finite()).map(|v| v.round() as i64)),
            TimestampFormat::EpochSeconds => raw
                .parse::<i64>()
                .ok()
                .and_then(|v| v.checked_mul(1000))
                .or_else(|| {
                    raw.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .map(|v| (v * 1000.0).round() as i64)
                }),
        }
    }

    fn render_timestamp(&self, ts: Timestamp) -> String {
        match self.timestamp_format {
            TimestampFormat::Iso8601 => format_iso8601(ts),
            TimestampFormat::EpochMillis => ts.to_string(),
            TimestampFormat::EpochSeconds if ts % 1000 == 0 => (ts / 1000).to_string(),
            TimestampFormat::EpochSeconds => format!("{}", ts as f64 / 1000.0),
        }
    }
}

/// Reads an event log from CSV. A header row is required. Columns other than
/// the case, activity and timestamp columns become payload entries; empty cells
/// are skipped.
pub fn parse_csv<R: Read>(source: R, schema: &CsvSchema) -> Result<EventLog, EventLogError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter)
        .has_headers(true)
        .flexible(false)
        .from_reader(source);

    let headers = match reader.headers() {
        Ok(h) => h.clone(),
        Err(e) if is_empty_input(&e) => return Ok(EventLog::default()),
        Err(e) => return Err(csv_error(e)),
    };
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Ok(EventLog::default());
    }
    let position = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| EventLogError::MissingColumn(name.to_string()))
    };
    let case_col = position(&schema.case_column)?;
    let act_col = position(&schema.activity_column)?;
    let ts_col = position(&schema.timestamp_column)?;
    let key_cols = schema
        .activity_key_columns
        .iter()
        .map(|c| position(c))
        .collect::<Result<Vec<_>, _>>()?;
    let reserved: BTreeSet<usize> = [case_col, act_col, ts_col].into_iter().chain(key_cols.iter().copied()).collect();

    let mut events = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |i: usize| record.get(i).unwrap_or("");
        let mut name = field(act_col).trim().to_string();
        for &k in &key_cols {
            name.push(':');
            name.push_str(field(k).trim());
        }
        if field(act_col).trim().is_empty() {
            return Err(EventLogError::MalformedRow {
                line,
                message: "empty activity name".into(),
            });
        }
        let raw_ts = field(ts_col);
        let timestamp = schema.parse_timestamp(raw_ts).ok_or_else(|| EventLogError::Timestamp {
            line,
            value: raw_ts.to_string(),
        })?;
        let payload: BTreeMap<String, String> = headers
            .iter()
            .enumerate()
            .filter(|(i, _)| !reserved.contains(i) && !field(*i).is_empty())
            .map(|(i, h)| (h.to_string(), field(i).to_string()))
            .collect();
        events.push(ActivityEvent {
            case_id: field(case_col).trim().to_string(),
            name,
            timestamp,
            payload,
        });
    }
    EventLog::from_events(events)
}

pub fn parse_csv_path(path: &Path, schema: &CsvSchema) -> Result<EventLog, EventLogError> {
    parse_csv(File::open(path)?, schema)
}

/// Writes `log` as CSV using the schema's column names. Payload keys become
/// extra columns (sorted); missing values are written empty.
pub fn write_csv<W: Write>(log: &EventLog, sink: W, schema: &CsvSchema) -> Result<(), EventLogError> {
    let payload_keys: BTreeSet<&String> = log
        .traces()
        .iter()
        .flat_map(|t| t.events.iter().flat_map(|e| e.payload.keys()))
        .collect();
    let mut writer = csv::WriterBuilder::new().delimiter(schema.delimiter).from_writer(sink);
    let mut header = vec![
        schema.case_column.as_str(),
        schema.activity_column.as_str(),
        schema.timestamp_column.as_str(),
    ];
    header.extend(payload_keys.iter().map(|k| k.as_str()));
    writer.write_record(&header).map_err(csv_error)?;
    for trace in log.traces() {
        for event in &trace.events {
            let mut row = vec![
                event.case_id.clone(),
                event.name.clone(),
                schema.render_timestamp(event.timestamp),
            ];
            row.extend(
                payload_keys
                    .iter()
                    .map(|k| event.payload.get(*k).cloned().unwrap_or_default()),
            );
            writer.write_record(&row).map_err(csv_error)?;
        }
    }
    writer.flush()?;
    Ok(())
}

fn is_empty_input(e: &csv::Error) -> bool {
    matches!(e.kind(), csv::ErrorKind::Io(err) if err.kind() == std::io::ErrorKind::UnexpectedEof)
}

fn csv_error(e: csv::Error) -> EventLogError {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => EventLogError::Io(io),
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => EventLogError::MalformedRow {
            line,
            message: format!("expected {expected_len} fields, found {len}"),
        },
        other => EventLogError::MalformedRow {
            line,
            message: format!("{other:?}"),
        },
    }
}
