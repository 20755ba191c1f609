//! Reads a small XES document, keeping only `complete` lifecycle events, and
//! writes it back out as CSV.

use ucx::event_log::{extract_variants, parse_xes, partition, write_csv, CsvSchema, XesConfig};

const XES: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<log xes.version="1.0">
  <trace>
    <string key="concept:name" value="c1"/>
    <event><string key="concept:name" value="Register"/><string key="lifecycle:transition" value="start"/><date key="time:timestamp" value="2024-03-01T09:00:00.000+00:00"/></event>
    <event><string key="concept:name" value="Register"/><string key="lifecycle:transition" value="complete"/><date key="time:timestamp" value="2024-03-01T09:05:00.000+00:00"/></event>
    <event><string key="concept:name" value="Check"/><string key="lifecycle:transition" value="complete"/><date key="time:timestamp" value="2024-03-01T10:00:00.000+00:00"/></event>
  </trace>
  <trace>
    <string key="concept:name" value="c2"/>
    <event><string key="concept:name" value="Register"/><string key="lifecycle:transition" value="complete"/><date key="time:timestamp" value="2024-03-02T08:00:00.000+00:00"/></event>
    <event><string key="concept:name" value="Pay"/><string key="lifecycle:transition" value="complete"/><date key="time:timestamp" value="2024-03-02T08:30:00.000+00:00"/></event>
  </trace>
</log>
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let log = parse_xes(XES.as_bytes(), &XesConfig::default())?;
    println!("{} traces, {} events", log.len(), log.event_count());
    println!("{} variants, {} partitions", extract_variants(&log).len(), partition(&log, None, false)?.len());
    write_csv(&log, std::io::stdout(), &CsvSchema::default())?;
    Ok(())
}
