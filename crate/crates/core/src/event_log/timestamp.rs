use chrono::{DateTime, NaiveDate, NaiveDateTime, SecondsFormat, TimeZone, Utc};

use super::Timestamp;

const NAIVE_FORMATS: &[&str] = &[
    "%Y-%m-%dT%H:%M:%S%.f",
    "%Y-%m-%d %H:%M:%S%.f",
    "%Y-%m-%dT%H:%M",
    "%Y-%m-%d %H:%M",
    "%Y/%m/%d %H:%M:%S%.f",
];

const ZONED_FORMATS: &[&str] = &["%Y-%m-%d %H:%M:%S%.f%:z", "%Y-%m-%d %H:%M:%S%.f%z", "%Y-%m-%dT%H:%M:%S%.f%z"];

/// Parses an ISO-8601 style instant into milliseconds since the epoch.
/// Values without an offset are read as UTC.
pub fn parse_iso8601(value: &str) -> Option<Timestamp> {
    let value = value.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(value) {
        return Some(t.timestamp_millis());
    }
    for f in ZONED_FORMATS {
        if let Ok(t) = DateTime::parse_from_str(value, f) {
            return Some(t.timestamp_millis());
        }
    }
    for f in NAIVE_FORMATS {
        if let Ok(t) = NaiveDateTime::parse_from_str(value, f) {
            return Some(Utc.from_utc_datetime(&t).timestamp_millis());
        }
    }
    NaiveDate::parse_from_str(value, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .map(|t| Utc.from_utc_datetime(&t).timestamp_millis())
}

/// RFC 3339 rendering in UTC with millisecond precision.
pub fn format_iso8601(ts: Timestamp) -> String {
    match Utc.timestamp_millis_opt(ts).single() {
        Some(t) => t.to_rfc3339_opts(SecondsFormat::Millis, true),
        None => ts.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_common_shapes() {
        let base = parse_iso8601("2012-01-02T10:00:00Z").unwrap();
        assert_eq!(parse_iso8601("2012-01-02T12:00:00+02:00"), Some(base));
        assert_eq!(parse_iso8601("2012-01-02 10:00:00"), Some(base));
        assert_eq!(parse_iso8601("2012-01-02T10:00:00.000"), Some(base));
        assert_eq!(parse_iso8601("2012-01-02 10:00:00.250"), Some(base + 250));
        assert_eq!(parse_iso8601("2012-01-02T10:00:00.000+0000"), Some(base));
        assert!(parse_iso8601("2012-01-02").is_some());
        assert_eq!(parse_iso8601("yesterday"), None);
    }

    #[test]
    fn format_round_trips() {
        let ts = parse_iso8601("2020-05-17T08:09:10.123Z").unwrap();
        assert_eq!(parse_iso8601(&format_iso8601(ts)), Some(ts));
    }
}
