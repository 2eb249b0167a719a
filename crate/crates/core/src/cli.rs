//! `validate`, `simulate` and `sweep` commands.
//!
//! Exit codes are shared by every command: 0 success, 1 I/O or runtime
//! failure, 2 invalid input. Machine-readable results go to files; stdout
//! carries short line-oriented status only.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::Value;

use crate::energy::EnergyClass;
use crate::report::{fmt_num, write_requests_csv, write_summary_json, write_timeseries_csv, SimulationReport};
use crate::scenario::{Scenario, ScenarioError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "cdn-energy", version, about = "Energy accounting simulator for hierarchical CDNs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a scenario document and report every violation.
    Validate { scenario: PathBuf },
    /// Run one simulation and write its report files.
    Simulate(SimulateArgs),
    /// Run the cross product of parameter values and seeds.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub scenario: PathBuf,
    /// Overrides `simulation.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the per-request audit trail.
    #[arg(long)]
    pub requests_csv: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    pub scenario: PathBuf,
    /// Dotted path into the scenario document; `*` matches every array item.
    #[arg(long)]
    pub param: String,
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<String>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub seeds: Vec<u64>,
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads; 0 uses one per processor.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[arg(long)]
    pub requests_csv: bool,
}

pub fn execute(cli: Cli, out: &mut dyn Write) -> i32 {
    match cli.command {
        Command::Validate { scenario } => cmd_validate(&scenario, out),
        Command::Simulate(args) => cmd_simulate(&args, out),
        Command::Sweep(args) => cmd_sweep(&args, out),
    }
}

fn report_error(e: &ScenarioError, out: &mut dyn Write) -> i32 {
    match e {
        ScenarioError::Io { .. } => {
            let _ = writeln!(out, "error: {e}");
            EXIT_IO
        }
        ScenarioError::Parse { .. } => {
            let _ = writeln!(out, "document: {e}");
            EXIT_INVALID
        }
        ScenarioError::Invalid(violations) => {
            for v in violations {
                let _ = writeln!(out, "{v}");
            }
            EXIT_INVALID
        }
    }
}

pub fn cmd_validate(path: &Path, out: &mut dyn Write) -> i32 {
    match crate::scenario::load_scenario(path) {
        Ok(_) => {
            let _ = writeln!(out, "OK");
            EXIT_OK
        }
        Err(e) => report_error(&e, out),
    }
}

fn read_document(path: &Path) -> Result<Value, ScenarioError> {
    let bytes = std::fs::read(path).map_err(|source| ScenarioError::Io { path: path.to_path_buf(), source })?;
    Ok(serde_json::from_slice(&bytes)?)
}

fn write_outputs(report: &SimulationReport, dir: &Path, requests: bool) -> Result<(), String> {
    std::fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    write_summary_json(report, dir.join("summary.json")).map_err(|e| e.to_string())?;
    write_timeseries_csv(report, dir.join("timeseries.csv")).map_err(|e| e.to_string())?;
    if requests {
        write_requests_csv(report, dir.join("requests.csv")).map_err(|e| e.to_string())?;
    }
    Ok(())
}

/// One-line human summary of a run.
pub fn summary_line(report: &SimulationReport) -> String {
    format!(
        "total_wh={} requests={} hit_rate={}",
        fmt_num(report.aggregate.total_wh()),
        report.aggregate.request_count(),
        fmt_num(report.hits.hit_rate())
    )
}

pub fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write) -> i32 {
    let mut scenario = match crate::scenario::load_scenario(&args.scenario) {
        Ok(s) => s,
        Err(e) => return report_error(&e, out),
    };
    if let Some(seed) = args.seed {
        scenario.seed = seed;
    }
    let report = crate::engine::run(&scenario);
    if let Err(e) = write_outputs(&report, &args.out, args.requests_csv) {
        let _ = writeln!(out, "error: {e}");
        return EXIT_IO;
    }
    let _ = writeln!(out, "{}", summary_line(&report));
    EXIT_OK
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathError {
    Missing(String),
    BadIndex(String),
}

impl std::fmt::Display for PathError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PathError::Missing(s) => write!(f, "no key `{s}`"),
            PathError::BadIndex(s) => write!(f, "bad array index `{s}`"),
        }
    }
}

/// Replaces every value addressed by `path` with `new`. Returns the number of
/// replaced slots; fails without partial edits if the path does not resolve.
/// Under `*`, items the rest of the path does not resolve in are skipped, as
/// long as at least one item matches.
pub fn set_path(doc: &mut Value, path: &str, new: &Value) -> Result<usize, PathError> {
    let segments: Vec<&str> = path.split('.').collect();
    let mut probe = doc.clone();
    let n = set_rec(&mut probe, &segments, new)?;
    *doc = probe;
    Ok(n)
}

fn set_rec(v: &mut Value, segs: &[&str], new: &Value) -> Result<usize, PathError> {
    let Some((&head, rest)) = segs.split_first() else {
        *v = new.clone();
        return Ok(1);
    };
    match v {
        Value::Object(m) => {
            let child = m.get_mut(head).ok_or_else(|| PathError::Missing(head.to_string()))?;
            set_rec(child, rest, new)
        }
        Value::Array(a) if head == "*" => {
            if a.is_empty() {
                return Err(PathError::Missing(head.to_string()));
            }
            let mut n = 0;
            let mut first_err = None;
            for item in a.iter_mut() {
                match set_rec(item, rest, new) {
                    Ok(k) => n += k,
                    Err(e) => {
                        first_err.get_or_insert(e);
                    }
                }
            }
            match first_err {
                Some(e) if n == 0 => Err(e),
                _ => Ok(n),
            }
        }
        Value::Array(a) => {
            let i: usize = head.parse().map_err(|_| PathError::BadIndex(head.to_string()))?;
            let len = a.len();
            let child = a.get_mut(i).ok_or_else(|| PathError::BadIndex(format!("{i} (len {len})")))?;
            set_rec(child, rest, new)
        }
        _ => Err(PathError::Missing(head.to_string())),
    }
}

/// Sweep values are JSON literals when they parse as such, strings otherwise.
pub fn parse_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

struct RunResult {
    value_index: usize,
    value: String,
    seed: u64,
    outcome: Result<SimulationReport, String>,
}

pub fn sweep_header() -> String {
    let mut h = String::from("value_index,value,seed,status");
    for c in EnergyClass::ALL {
        let _ = write!(h, ",{}_wh", c.name());
    }
    h.push_str(",total_wh,transport_wh,hit_rate,requests");
    h
}

pub fn cmd_sweep(args: &SweepArgs, out: &mut dyn Write) -> i32 {
    let base = match read_document(&args.scenario) {
        Ok(v) => v,
        Err(e) => return report_error(&e, out),
    };
    if let Err(e) = set_path(&mut base.clone(), &args.param, &Value::Null) {
        let _ = writeln!(out, "{}: {e}", args.param);
        return EXIT_INVALID;
    }

    let jobs: Vec<(usize, &String, u64)> =
        args.values.iter().enumerate().flat_map(|(i, v)| args.seeds.iter().map(move |&s| (i, v, s))).collect();

    let run_one = |&(value_index, raw, seed): &(usize, &String, u64)| {
        let outcome = (|| {
            let mut doc = base.clone();
            set_path(&mut doc, &args.param, &parse_value(raw)).map_err(|e| e.to_string())?;
            let mut scenario = Scenario::from_value(doc).map_err(|e| match &e {
                ScenarioError::Invalid(v) => v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "),
                other => other.to_string(),
            })?;
            scenario.seed = seed;
            let report = crate::engine::run(&scenario);
            let dir = args.out.join(format!("run_{value_index:03}_seed_{seed}"));
            write_outputs(&report, &dir, args.requests_csv)?;
            Ok(report)
        })();
        RunResult { value_index, value: raw.clone(), seed, outcome }
    };

    let pool = match rayon::ThreadPoolBuilder::new().num_threads(args.jobs).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(out, "error: {e}");
            return EXIT_IO;
        }
    };
    let mut results: Vec<RunResult> = pool.install(|| jobs.par_iter().map(run_one).collect());
    results.sort_by_key(|r| (r.value_index, r.seed));

    let mut csv = sweep_header();
    csv.push('\n');
    let mut failed = 0;
    for r in &results {
        let _ = write!(csv, "{},{},{}", r.value_index, r.value, r.seed);
        match &r.outcome {
            Ok(rep) => {
                csv.push_str(",ok");
                for c in EnergyClass::ALL {
                    let _ = write!(csv, ",{}", fmt_num(rep.aggregate.get(c)));
                }
                let _ = writeln!(
                    csv,
                    ",{},{},{},{}",
                    fmt_num(rep.aggregate.total_wh()),
                    fmt_num(rep.aggregate.transport_wh()),
                    fmt_num(rep.hits.hit_rate()),
                    rep.aggregate.request_count()
                );
            }
            Err(msg) => {
                failed += 1;
                let clean = msg.replace([',', '\n', '"'], ";");
                let _ = write!(csv, ",error: {clean}");
                csv.push_str(&",".repeat(EnergyClass::ALL.len() + 4));
                csv.push('\n');
            }
        }
    }
    if let Err(e) = std::fs::create_dir_all(&args.out).and_then(|_| std::fs::write(args.out.join("sweep.csv"), csv)) {
        let _ = writeln!(out, "error: cannot write {}: {e}", args.out.join("sweep.csv").display());
        return EXIT_IO;
    }
    for r in &results {
        match &r.outcome {
            Ok(rep) => {
                let _ = writeln!(out, "value={} seed={} {}", r.value, r.seed, summary_line(rep));
            }
            Err(msg) => {
                let _ = writeln!(out, "value={} seed={} failed: {msg}", r.value, r.seed);
            }
        }
    }
    if failed > 0 {
        EXIT_IO
    } else {
        EXIT_OK
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn set_path_objects_indices_and_wildcards() {
        let mut v = json!({"a": {"b": [{"c": 1}, {"c": 2}]}});
        assert_eq!(set_path(&mut v, "a.b.1.c", &json!(9)).unwrap(), 1);
        assert_eq!(v["a"]["b"][1]["c"], 9);
        assert_eq!(set_path(&mut v, "a.b.*.c", &json!(0)).unwrap(), 2);
        assert_eq!(v, json!({"a": {"b": [{"c": 0}, {"c": 0}]}}));
        let mut mixed = json!({"a": [{"c": 1}, {"d": 2}]});
        assert_eq!(set_path(&mut mixed, "a.*.c", &json!(5)).unwrap(), 1);
        assert_eq!(mixed, json!({"a": [{"c": 5}, {"d": 2}]}));
    }

    #[test]
    fn set_path_failures_leave_doc_untouched() {
        let mut v = json!({"a": [{"c": 1}, {"d": 2}]});
        let before = v.clone();
        assert!(set_path(&mut v, "a.*.e", &json!(5)).is_err());
        assert!(set_path(&mut v, "a.0.d", &json!(5)).is_err());
        assert_eq!(v, before);
        assert!(matches!(set_path(&mut v, "a.x", &json!(5)), Err(PathError::BadIndex(_))));
        assert!(matches!(set_path(&mut v, "a.7", &json!(5)), Err(PathError::BadIndex(_))));
        assert!(matches!(set_path(&mut v, "zzz", &json!(5)), Err(PathError::Missing(_))));
    }

    #[test]
    fn values_parse_as_json_first() {
        assert_eq!(parse_value("1e9"), json!(1e9));
        assert_eq!(parse_value("lfu"), json!("lfu"));
        assert_eq!(parse_value("true"), json!(true));
    }
}
