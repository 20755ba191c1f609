//! Command-line front end: argument parsing, config files and the six
//! subcommands. The `ucx` binary only forwards to [`run`].

pub mod bench;

use std::collections::BTreeSet;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use serde::Deserialize;
use thiserror::Error;

use crate::cx_model::{parse_graph_json, CxGraph, Direction, GraphDocument, GraphError, UcxGraph};
use crate::discovery::{discover_partitions, DiscoveryConfig, DiscoveryError};
use crate::event_log::{
    parse_csv_path, parse_xes_path, partition, write_csv, CsvSchema, EventLog, EventLogError, LifecycleFilter,
    Partition, RepeatPolicy, TimestampFormat, Variant, XesConfig,
};
use crate::simplify::{render_as_gateways, simplify_graph, Notation, SimplifyError};
use crate::unification::{unify_graphs, unify_log, UnifyConfig, UnifyError};
use crate::verify::{gen_synthetic_log, verify, SyntheticSpec, VerifyError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Invariant(_) => 3,
        }
    }
}

impl From<EventLogError> for CliError {
    fn from(e: EventLogError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<DiscoveryError> for CliError {
    fn from(e: DiscoveryError) -> Self {
        match e {
            DiscoveryError::InvalidConfig(_) | DiscoveryError::UnknownBackend(_) => CliError::Usage(e.to_string()),
            DiscoveryError::Contract { .. } => CliError::Invariant(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<UnifyError> for CliError {
    fn from(e: UnifyError) -> Self {
        match e {
            UnifyError::Inconsistent(_) => CliError::Invariant(e.to_string()),
            UnifyError::Discovery(d) => d.into(),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<SimplifyError> for CliError {
    fn from(e: SimplifyError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

fn io_err(path: &Path, e: io::Error) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogFormat {
    Csv,
    Xes,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Dot,
    Text,
}

/// Settings shared by the subcommands. Read from a TOML file, then
/// overridden by command-line flags.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub input_format: Option<LogFormat>,
    pub schema: CsvSchema,
    pub xes: XesConfig,
    pub discovery: DiscoveryConfig,
    pub direction: Direction,
    pub split_by_variants: bool,
    /// JSON file holding an array of activity sequences.
    pub variants: Option<PathBuf>,
    pub output_format: OutputFormat,
    pub repetitions: usize,
    pub jobs: Option<usize>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: None,
            input_format: None,
            schema: CsvSchema::default(),
            xes: XesConfig::default(),
            discovery: DiscoveryConfig::default(),
            direction: Direction::Split,
            split_by_variants: false,
            variants: None,
            output_format: OutputFormat::Json,
            repetitions: 3,
            jobs: None,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("config file: {e}")))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.variants.is_some() && self.input.is_none() {
            return Err(CliError::Usage("a variant selection requires an input log".into()));
        }
        if self.jobs == Some(0) {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        self.discovery.validate()?;
        Ok(())
    }

    fn log_format(&self, path: &Path) -> LogFormat {
        self.input_format.unwrap_or_else(|| {
            let name = path.to_string_lossy().to_ascii_lowercase();
            if name.ends_with(".xes") || name.ends_with(".xes.gz") {
                LogFormat::Xes
            } else {
                LogFormat::Csv
            }
        })
    }

    pub fn load_log(&self) -> Result<EventLog, CliError> {
        let path = self
            .input
            .as_deref()
            .ok_or_else(|| CliError::Usage("no input log given (use --input)".into()))?;
        let log = match self.log_format(path) {
            LogFormat::Csv => parse_csv_path(path, &self.schema),
            LogFormat::Xes => parse_xes_path(path, &self.xes),
        }
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        info!("read {} traces, {} events from {}", log.len(), log.event_count(), path.display());
        Ok(log)
    }

    pub fn load_variants(&self) -> Result<Option<Vec<Variant>>, CliError> {
        let Some(path) = &self.variants else {
            return Ok(None);
        };
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        let sequences: Vec<Vec<String>> = serde_json::from_str(&text)
            .map_err(|e| CliError::Data(format!("{}: expected an array of activity arrays: {e}", path.display())))?;
        Ok(Some(
            sequences
                .into_iter()
                .map(|sequence| Variant {
                    sequence,
                    case_ids: BTreeSet::new(),
                })
                .collect(),
        ))
    }

    pub fn partitions(&self, log: &EventLog) -> Result<Vec<Partition>, CliError> {
        let selected = self.load_variants()?;
        Ok(partition(log, selected.as_deref(), self.split_by_variants)?)
    }

    fn unify_config(&self) -> UnifyConfig {
        UnifyConfig {
            discovery: self.discovery.clone(),
            direction: self.direction,
            split_by_variants: self.split_by_variants,
            jobs: self.jobs,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ucx", version, about = "Causal execution graph discovery and unification for event logs")]
pub struct Cli {
    /// TOML file with default settings; flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Worker threads for partition-level work.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Discover one causal graph per partition of a log.
    Discover(DiscoverArgs),
    /// Unify per-partition graphs into one gateway-annotated graph.
    Unify(UnifyArgs),
    /// Print and factor the formulas of OR gateways.
    Simplify(SimplifyArgs),
    /// Check a unified graph for soundness and completeness.
    Verify(VerifyArgs),
    /// Time discovery against partition size.
    Bench(BenchArgs),
    /// Convert logs, graphs and synthetic specs.
    Export(ExportArgs),
}

#[derive(Debug, Args, Default)]
pub struct LogArgs {
    /// Event log (CSV, XES or XES.GZ).
    #[arg(long, short, value_name = "FILE")]
    pub input: Option<PathBuf>,
    /// Log format; inferred from the extension when absent.
    #[arg(long = "log-format", value_enum)]
    pub log_format: Option<LogFormat>,
    #[arg(long)]
    pub case_column: Option<String>,
    #[arg(long)]
    pub activity_column: Option<String>,
    #[arg(long)]
    pub timestamp_column: Option<String>,
    /// iso8601, epoch-seconds or epoch-millis.
    #[arg(long)]
    pub timestamp_format: Option<TimestampFormat>,
    /// Extra columns appended to the activity name (repeatable).
    #[arg(long = "activity-key", value_name = "COLUMN")]
    pub activity_key: Vec<String>,
    #[arg(long)]
    pub delimiter: Option<char>,
    /// XES lifecycle filter: complete or all.
    #[arg(long, value_enum)]
    pub lifecycle: Option<LifecycleArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LifecycleArg {
    Complete,
    All,
}

#[derive(Debug, Args, Default)]
pub struct DiscoveryArgs {
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub coeff_prune: Option<f64>,
    #[arg(long)]
    pub min_traces: Option<usize>,
    #[arg(long)]
    pub backend: Option<String>,
    /// first, last or drop_trace.
    #[arg(long)]
    pub repeat_policy: Option<RepeatPolicy>,
    /// Subtract each trace's first timestamp before discovery.
    #[arg(long)]
    pub anchor: bool,
    /// Fit on every trace, including those against the dominant order.
    #[arg(long)]
    pub keep_noisy_traces: bool,
    /// Largest share of traces the noise filter may remove.
    #[arg(long)]
    pub max_drop_fraction: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct PartitionArgs {
    /// One partition per variant instead of per activity set.
    #[arg(long)]
    pub split_by_variants: bool,
    /// JSON array of activity sequences selecting variants.
    #[arg(long, value_name = "FILE")]
    pub variants: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiscoverArgs {
    #[command(flatten)]
    pub log: LogArgs,
    #[command(flatten)]
    pub discovery: DiscoveryArgs,
    #[command(flatten)]
    pub partitions: PartitionArgs,
    /// Directory receiving one JSON file per partition and summary.csv.
    #[arg(long, short, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct UnifyArgs {
    #[command(flatten)]
    pub log: LogArgs,
    #[command(flatten)]
    pub discovery: DiscoveryArgs,
    #[command(flatten)]
    pub partitions: PartitionArgs,
    /// Pre-built CX graph JSON files, used instead of a log.
    #[arg(long, num_args = 1.., value_name = "FILE", conflicts_with = "input")]
    pub graphs: Vec<PathBuf>,
    #[arg(long)]
    pub direction: Option<Direction>,
    #[arg(long, short, value_enum)]
    pub format: Option<OutputFormat>,
    /// Output file; standard output when absent.
    #[arg(long, short, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Also write DOT to this file.
    #[arg(long, value_name = "FILE")]
    pub dot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimplifyArgs {
    /// Unified graph JSON.
    #[arg(long, short, value_name = "FILE")]
    pub unified: PathBuf,
    /// unicode (∧, ⊕) or ascii (&, ^).
    #[arg(long, default_value = "unicode")]
    pub notation: Notation,
    /// Emit the graph with OR gateways redrawn as AND/XOR gateways.
    #[arg(long)]
    pub render_gateways: bool,
    #[arg(long, short, value_enum)]
    pub format: Option<OutputFormat>,
    #[arg(long, short, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Input CX graph JSON files.
    #[arg(long, num_args = 0.., value_name = "FILE")]
    pub inputs: Vec<PathBuf>,
    /// Unified graph JSON.
    #[arg(long, short, value_name = "FILE")]
    pub unified: PathBuf,
    #[arg(long, short, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub log: LogArgs,
    #[command(flatten)]
    pub discovery: DiscoveryArgs,
    #[command(flatten)]
    pub partitions: PartitionArgs,
    /// Synthetic partition sizes (activity counts) instead of a log.
    #[arg(long, value_delimiter = ',', conflicts_with = "input")]
    pub synthetic: Vec<usize>,
    /// Traces per synthetic partition.
    #[arg(long, default_value_t = 500)]
    pub traces: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub repetitions: Option<usize>,
    /// CSV of per-partition timings; standard output when absent.
    #[arg(long, short, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// JSON file receiving the full report including fits.
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExportFormat {
    Csv,
    Json,
    Dot,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[command(flatten)]
    pub log: LogArgs,
    /// CX or U-CX graph JSON to convert.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["input", "spec"])]
    pub graph: Option<PathBuf>,
    /// Synthetic spec JSON to sample a log from.
    #[arg(long, value_name = "FILE", conflicts_with = "input")]
    pub spec: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub to: ExportFormat,
    #[arg(long, short, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

impl LogArgs {
    fn apply(&self, c: &mut RunConfig) {
        if let Some(p) = &self.input {
            c.input = Some(p.clone());
        }
        if let Some(f) = self.log_format {
            c.input_format = Some(f);
        }
        if let Some(v) = &self.case_column {
            c.schema.case_column = v.clone();
        }
        if let Some(v) = &self.activity_column {
            c.schema.activity_column = v.clone();
        }
        if let Some(v) = &self.timestamp_column {
            c.schema.timestamp_column = v.clone();
        }
        if let Some(v) = self.timestamp_format {
            c.schema.timestamp_format = v;
        }
        if !self.activity_key.is_empty() {
            c.schema.activity_key_columns = self.activity_key.clone();
        }
        if let Some(d) = self.delimiter {
            c.schema.delimiter = d as u8;
        }
        if let Some(l) = self.lifecycle {
            c.xes.lifecycle = match l {
                LifecycleArg::Complete => LifecycleFilter::Complete,
                LifecycleArg::All => LifecycleFilter::All,
            };
        }
    }
}

impl DiscoveryArgs {
    fn apply(&self, c: &mut RunConfig) {
        let d = &mut c.discovery;
        if let Some(v) = self.theta {
            d.theta = v;
        }
        if let Some(v) = self.coeff_prune {
            d.coeff_prune = v;
        }
        if let Some(v) = self.min_traces {
            d.min_traces = v;
        }
        if let Some(v) = &self.backend {
            d.backend = v.clone();
        }
        if let Some(v) = self.repeat_policy {
            d.repeat_policy = v;
        }
        if self.anchor {
            d.anchor = true;
        }
        if self.keep_noisy_traces {
            d.drop_noisy_traces = false;
        }
        if let Some(v) = self.max_drop_fraction {
            d.max_drop_fraction = v;
        }
    }
}

impl PartitionArgs {
    fn apply(&self, c: &mut RunConfig) {
        if self.split_by_variants {
            c.split_by_variants = true;
        }
        if let Some(v) = &self.variants {
            c.variants = Some(v.clone());
        }
    }
}

fn write_output(path: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| io_err(p, e)),
        None => stdout.write_all(text.as_bytes()).map_err(CliError::from),
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn read_cx(path: &Path) -> Result<CxGraph, CliError> {
    match parse_graph_json(&read_text(path)?).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))? {
        GraphDocument::Cx(g) => Ok(g),
        GraphDocument::Ucx(_) => Err(CliError::Data(format!("{}: expected a CX graph", path.display()))),
    }
}

fn read_ucx(path: &Path) -> Result<UcxGraph, CliError> {
    let text = read_text(path)?;
    // Invariant violations are reported by `verify`, so no validation here.
    UcxGraph::from_json_unchecked(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Writes one JSON graph per partition and `summary.csv` into `out`.
pub fn cmd_discover(config: &RunConfig, out: &Path, stdout: &mut dyn Write) -> Result<(), CliError> {
    config.validate()?;
    let log = config.load_log()?;
    let parts = config.partitions(&log)?;
    if parts.is_empty() {
        warn!("the log has no traces; nothing to discover");
        writeln!(stdout, "0 partitions")?;
        return Ok(());
    }
    let outcomes = discover_partitions(&parts, &config.discovery, config.jobs)?;
    fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    let width = outcomes.len().to_string().len().max(3);
    let summary_path = out.join("summary.csv");
    let mut summary = csv::Writer::from_path(&summary_path)
        .map_err(|e| CliError::Data(format!("{}: {e}", summary_path.display())))?;
    summary
        .write_record(["index", "partition", "activities", "traces", "edges", "skipped", "seconds", "file"])
        .map_err(|e| CliError::Data(e.to_string()))?;
    for (i, o) in outcomes.iter().enumerate() {
        let file = format!("partition-{:0width$}.json", i + 1);
        let path = out.join(&file);
        fs::write(&path, o.graph.to_json()).map_err(|e| io_err(&path, e))?;
        summary
            .write_record([
                (i + 1).to_string(),
                o.label.clone(),
                o.activity_set.len().to_string(),
                o.traces.to_string(),
                o.graph.edge_count().to_string(),
                o.skipped.is_some().to_string(),
                format!("{:.6}", o.elapsed.as_secs_f64()),
                file,
            ])
            .map_err(|e| CliError::Data(e.to_string()))?;
    }
    summary.flush()?;
    let skipped = outcomes.iter().filter(|o| o.skipped.is_some()).count();
    writeln!(
        stdout,
        "{} partitions ({} skipped), {} traces; summary in {}",
        outcomes.len(),
        skipped,
        outcomes.iter().map(|o| o.traces).sum::<usize>(),
        summary_path.display()
    )?;
    Ok(())
}

fn render_ucx(u: &UcxGraph, format: OutputFormat, text: impl FnOnce() -> String) -> String {
    match format {
        OutputFormat::Json => u.to_json(),
        OutputFormat::Dot => u.to_dot(),
        OutputFormat::Text => text(),
    }
}

/// Unifies graphs discovered from the configured log, or `graphs` when given.
pub fn cmd_unify(
    config: &RunConfig,
    graphs: &[PathBuf],
    out: Option<&Path>,
    dot: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    config.validate()?;
    let unification = if graphs.is_empty() {
        let log = config.load_log()?;
        let selected = config.load_variants()?;
        unify_log(&log, selected.as_deref(), &config.unify_config())?.unification
    } else {
        if config.variants.is_some() || config.split_by_variants {
            return Err(CliError::Usage("variant options need an input log, not --graphs".into()));
        }
        let inputs = graphs.iter().map(|p| read_cx(p)).collect::<Result<Vec<_>, _>>()?;
        unify_graphs(&inputs, config.direction)?
    };
    let u = &unification.graph;
    u.validate().map_err(|e| CliError::Invariant(format!("unified graph is invalid: {e}")))?;
    let rendered = render_ucx(u, config.output_format, || {
        let mut s = unification.matrix.to_string();
        s.push('\n');
        for (a, b) in u.edges() {
            s.push_str(&format!("{a} -> {b}\n"));
        }
        for (id, alts) in u.or_alternatives() {
            s.push_str(&format!("{id}: {}\n", u.describe_alternatives(alts)));
        }
        s
    });
    write_output(out, &rendered, stdout)?;
    if let Some(p) = dot {
        fs::write(p, u.to_dot()).map_err(|e| io_err(p, e))?;
    }
    Ok(())
}

pub fn cmd_simplify(args: &SimplifyArgs, config: &RunConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    let u = read_ucx(&args.unified)?;
    u.validate().map_err(|e| CliError::Data(format!("{}: {e}", args.unified.display())))?;
    if args.render_gateways {
        let drawn = render_as_gateways(&u)?;
        let format = args.format.unwrap_or(config.output_format);
        let text = render_ucx(&drawn, format, || drawn.to_dot());
        return write_output(args.out.as_deref(), &text, stdout);
    }
    let mut text = String::new();
    for (id, raw, factored) in simplify_graph(&u)? {
        text.push_str(&format!(
            "{id}: {} => {}\n",
            raw.render(args.notation),
            factored.render(args.notation)
        ));
    }
    if text.is_empty() {
        info!("no OR gateways to simplify");
    }
    write_output(args.out.as_deref(), &text, stdout)
}

/// Prints the verification report as JSON. A failed check is an error with
/// exit code 3.
pub fn cmd_verify(args: &VerifyArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let u = read_ucx(&args.unified)?;
    let inputs = args.inputs.iter().map(|p| read_cx(p)).collect::<Result<Vec<_>, _>>()?;
    let report = verify(&u, &inputs)?;
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    write_output(args.out.as_deref(), &text, stdout)?;
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Invariant(format!(
            "verification failed with {} violation(s)",
            report.violations.len()
        )))
    }
}

pub fn cmd_bench(args: &BenchArgs, config: &RunConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    config.validate()?;
    let parts = if args.synthetic.is_empty() {
        config.partitions(&config.load_log()?)?
    } else {
        bench::synthetic_partitions(&args.synthetic, args.traces, config.seed)?
    };
    let report = bench::bench_partitions(&parts, &config.discovery, config.repetitions)?;
    let mut csv_bytes = Vec::new();
    bench::write_csv(&report, &mut csv_bytes).map_err(|e| CliError::Data(e.to_string()))?;
    write_output(args.out.as_deref(), &String::from_utf8_lossy(&csv_bytes), stdout)?;
    if let Some(p) = &args.report {
        let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
        json.push('\n');
        fs::write(p, json).map_err(|e| io_err(p, e))?;
    }
    let mut summary = String::new();
    match (&report.cubic, &report.linear) {
        (Some(c), Some(l)) => {
            summary.push_str(&format!("cubic fit R^2 = {:.4}\n", c.r_squared));
            summary.push_str(&format!("linear fit R^2 = {:.4}\n", l.r_squared));
        }
        _ => {
            if let Some(n) = &report.notice {
                summary.push_str(&format!("fit skipped: {n}\n"));
            }
        }
    }
    // Keep standard output pure CSV when it carries the table.
    if args.out.is_some() {
        stdout.write_all(summary.as_bytes())?;
    } else {
        eprint!("{summary}");
    }
    Ok(())
}

pub fn cmd_export(args: &ExportArgs, config: &RunConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    let text = if let Some(path) = &args.graph {
        let doc = parse_graph_json(&read_text(path)?).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        match (args.to, doc) {
            (ExportFormat::Dot, GraphDocument::Cx(g)) => g.to_dot(),
            (ExportFormat::Dot, GraphDocument::Ucx(u)) => u.to_dot(),
            (ExportFormat::Json, GraphDocument::Cx(g)) => g.to_json(),
            (ExportFormat::Json, GraphDocument::Ucx(u)) => u.to_json(),
            (ExportFormat::Csv, _) => return Err(CliError::Usage("graphs export to json or dot".into())),
        }
    } else {
        let log = if let Some(path) = &args.spec {
            let spec: SyntheticSpec = serde_json::from_str(&read_text(path)?)
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            gen_synthetic_log(&spec)?
        } else {
            config.load_log()?
        };
        match args.to {
            ExportFormat::Csv => {
                let mut buf = Vec::new();
                write_csv(&log, &mut buf, &config.schema)?;
                String::from_utf8(buf).expect("csv writer emits UTF-8")
            }
            _ => return Err(CliError::Usage("logs export to csv".into())),
        }
    };
    write_output(args.out.as_deref(), &text, stdout)
}

fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut config = match &cli.config {
        Some(p) => RunConfig::from_toml(&read_text(p)?)?,
        None => RunConfig::default(),
    };
    if cli.jobs.is_some() {
        config.jobs = cli.jobs;
    }
    match &cli.command {
        Command::Discover(a) => {
            a.log.apply(&mut config);
            a.discovery.apply(&mut config);
            a.partitions.apply(&mut config);
        }
        Command::Unify(a) => {
            a.log.apply(&mut config);
            a.discovery.apply(&mut config);
            a.partitions.apply(&mut config);
            if let Some(d) = a.direction {
                config.direction = d;
            }
            if let Some(f) = a.format {
                config.output_format = f;
            }
        }
        Command::Bench(a) => {
            a.log.apply(&mut config);
            a.discovery.apply(&mut config);
            a.partitions.apply(&mut config);
            if let Some(s) = a.seed {
                config.seed = s;
            }
            if let Some(r) = a.repetitions {
                config.repetitions = r;
            }
        }
        Command::Export(a) => a.log.apply(&mut config),
        Command::Simplify(_) | Command::Verify(_) => {}
    }
    Ok(config)
}

/// Executes a parsed command line.
pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let config = resolve(cli)?;
    match &cli.command {
        Command::Discover(a) => cmd_discover(&config, &a.out, stdout),
        Command::Unify(a) => cmd_unify(&config, &a.graphs, a.out.as_deref(), a.dot.as_deref(), stdout),
        Command::Simplify(a) => cmd_simplify(a, &config, stdout),
        Command::Verify(a) => cmd_verify(a, stdout),
        Command::Bench(a) => cmd_bench(a, &config, stdout),
        Command::Export(a) => cmd_export(a, &config, stdout),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_then_flags() {
        let c = RunConfig::from_toml(
            "direction = \"join\"\nrepetitions = 5\n[discovery]\ntheta = 0.1\n[schema]\ncase_column = \"case\"\n",
        )
        .unwrap();
        assert_eq!(c.direction, Direction::Join);
        assert_eq!(c.discovery.theta, 0.1);
        assert_eq!(c.schema.case_column, "case");
        assert_eq!(c.schema.activity_column, "concept:name");
        let mut c2 = c.clone();
        DiscoveryArgs {
            theta: Some(0.2),
            ..Default::default()
        }
        .apply(&mut c2);
        assert_eq!(c2.discovery.theta, 0.2);
        assert_eq!(c2.repetitions, 5);
    }

    #[test]
    fn unknown_config_keys_are_usage_errors() {
        let err = RunConfig::from_toml("thetta = 1").unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn variants_need_a_log() {
        let c = RunConfig {
            variants: Some("v.json".into()),
            ..Default::default()
        };
        assert_eq!(c.validate().unwrap_err().exit_code(), 1);
    }

    #[test]
    fn log_format_from_extension() {
        let c = RunConfig::default();
        assert_eq!(c.log_format(Path::new("x/BPI.xes.gz")), LogFormat::Xes);
        assert_eq!(c.log_format(Path::new("x/log.csv")), LogFormat::Csv);
    }

    #[test]
    fn usage_errors_exit_with_one() {
        let mut out = Vec::new();
        assert_eq!(run(["ucx", "frobnicate"], &mut out), 1);
        assert_eq!(run(["ucx", "unify", "--direction", "sideways", "--graphs", "a.json"], &mut out), 1);
        assert_eq!(run(["ucx", "--help"], &mut out), 0);
    }
}
