//! Run results and their on-disk formats.
//!
//! * `summary.json`: canonical JSON, keys sorted, floats rounded to 12
//!   significant digits, so identical runs produce identical bytes.
//! * `timeseries.csv`: one row per report tick with cumulative watt-hours.
//! * `requests.csv`: one row per delivered request, the audit trail for
//!   offline recomputation of every charge.

use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::energy::{EnergyClass, EnergyLedger};
use crate::scenario::Tier;
use crate::workload::ContentId;

#[derive(Debug, Error)]
#[error("cannot write {}: {source}", path.display())]
pub struct ReportError {
    pub path: PathBuf,
    #[source]
    pub source: io::Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetadata {
    pub seed: u64,
    pub scenario_hash: String,
    pub tool_version: String,
    pub horizon_s: f64,
    pub report_interval_s: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct HitCounts {
    pub edge: u64,
    pub regional: u64,
    pub origin: u64,
}

impl HitCounts {
    pub fn total(&self) -> u64 {
        self.edge + self.regional + self.origin
    }

    /// Share of requests served by a surrogate rather than the origin.
    pub fn hit_rate(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            n => (self.edge + self.regional) as f64 / n as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContentSummary {
    pub id: ContentId,
    pub rank: u32,
    pub requests: u64,
    pub total_wh: f64,
}

/// Cumulative state sampled at a report tick.
#[derive(Debug, Clone, PartialEq)]
pub struct TimePoint {
    pub t_s: f64,
    pub ledger: EnergyLedger,
    pub hit_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RequestRecord {
    pub t_s: f64,
    pub cluster_id: String,
    pub content: ContentId,
    pub serving_node: String,
    pub tier: Tier,
    pub hops: u32,
    pub size_bits: u64,
    pub transport_wh: f64,
    pub device_wh: f64,
    pub decode_wh: f64,
    pub replicas: u32,
    pub downloads_per_hr: f64,
    pub bitrate_bps: f64,
    pub duration_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub metadata: RunMetadata,
    /// Every watt-hour charged in the run.
    pub aggregate: EnergyLedger,
    /// Request energy per client cluster, in topology order.
    pub clusters: Vec<(String, EnergyLedger)>,
    /// Transport energy of replication pushes.
    pub replication: EnergyLedger,
    pub replication_pushes: u64,
    pub hits: HitCounts,
    pub top_contents: Vec<ContentSummary>,
    pub timeseries: Vec<TimePoint>,
    pub requests: Vec<RequestRecord>,
}

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.11e}").parse().expect("scientific notation round-trips")
}

/// Locale-independent decimal rendering of [`round12`].
pub fn fmt_num(x: f64) -> String {
    format!("{}", round12(x))
}

fn num(x: f64) -> Value {
    serde_json::Number::from_f64(round12(x)).map_or(Value::Null, Value::Number)
}

fn ledger_json(l: &EnergyLedger) -> Value {
    let mut m = Map::new();
    for c in EnergyClass::ALL {
        m.insert(format!("{}_wh", c.name()), num(l.get(c)));
    }
    m.insert("total_wh".into(), num(l.total_wh()));
    m.insert("request_count".into(), json!(l.request_count()));
    Value::Object(m)
}

impl SimulationReport {
    pub fn summary_value(&self) -> Value {
        let clusters: Map<String, Value> = self.clusters.iter().map(|(id, l)| (id.clone(), ledger_json(l))).collect();
        let top: Vec<Value> = self
            .top_contents
            .iter()
            .map(|c| {
                json!({
                    "content_id": c.id.to_string(),
                    "rank": c.rank,
                    "requests": c.requests,
                    "total_wh": num(c.total_wh),
                })
            })
            .collect();
        json!({
            "metadata": {
                "seed": self.metadata.seed,
                "scenario_hash": self.metadata.scenario_hash,
                "tool_version": self.metadata.tool_version,
                "horizon_s": num(self.metadata.horizon_s),
                "report_interval_s": num(self.metadata.report_interval_s),
            },
            "ledger": ledger_json(&self.aggregate),
            "clusters": clusters,
            "replication": {
                "ledger": ledger_json(&self.replication),
                "pushes": self.replication_pushes,
            },
            "hits": {
                "edge": self.hits.edge,
                "regional": self.hits.regional,
                "origin": self.hits.origin,
                "hit_rate": num(self.hits.hit_rate()),
            },
            "top_contents": top,
        })
    }

    pub fn summary_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.summary_value()).expect("serializable summary");
        s.push('\n');
        s
    }

    pub fn timeseries_csv(&self) -> String {
        let mut out = String::from(TIMESERIES_HEADER);
        out.push('\n');
        for p in &self.timeseries {
            out.push_str(&fmt_num(p.t_s));
            for c in EnergyClass::ALL {
                out.push(',');
                out.push_str(&fmt_num(p.ledger.get(c)));
            }
            let _ = writeln!(out, ",{},{}", fmt_num(p.ledger.total_wh()), fmt_num(p.hit_rate));
        }
        out
    }

    pub fn requests_csv(&self) -> String {
        let mut out = String::from(REQUESTS_HEADER);
        out.push('\n');
        for r in &self.requests {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                fmt_num(r.t_s),
                r.cluster_id,
                r.content,
                r.serving_node,
                r.hops,
                r.size_bits,
                fmt_num(r.transport_wh),
                fmt_num(r.device_wh),
                fmt_num(r.decode_wh),
                r.replicas,
                fmt_num(r.downloads_per_hr),
                fmt_num(r.bitrate_bps),
            );
        }
        out
    }
}

pub const TIMESERIES_HEADER: &str = "t_s,switching_wh,gateway_wh,provider_edge_wh,core_wh,wdm_wh,server_wh,storage_wh,wireless_device_wh,decoding_wh,total_wh,hit_rate";

pub const REQUESTS_HEADER: &str =
    "t_s,cluster_id,content_id,serving_node,hops,size_bits,transport_wh,device_wh,decode_wh,replicas,downloads_per_hr,bitrate_bps";

fn write_file(path: &Path, contents: &str) -> Result<(), ReportError> {
    std::fs::write(path, contents).map_err(|source| ReportError { path: path.to_path_buf(), source })
}

pub fn write_summary_json(report: &SimulationReport, path: impl AsRef<Path>) -> Result<(), ReportError> {
    write_file(path.as_ref(), &report.summary_json())
}

pub fn write_timeseries_csv(report: &SimulationReport, path: impl AsRef<Path>) -> Result<(), ReportError> {
    write_file(path.as_ref(), &report.timeseries_csv())
}

pub fn write_requests_csv(report: &SimulationReport, path: impl AsRef<Path>) -> Result<(), ReportError> {
    write_file(path.as_ref(), &report.requests_csv())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn empty_report() -> SimulationReport {
        SimulationReport {
            metadata: RunMetadata {
                seed: 1,
                scenario_hash: "abc".into(),
                tool_version: "0".into(),
                horizon_s: 10.0,
                report_interval_s: 20.0,
            },
            aggregate: EnergyLedger::new(),
            clusters: vec![("c1".into(), EnergyLedger::new())],
            replication: EnergyLedger::new(),
            replication_pushes: 0,
            hits: HitCounts::default(),
            top_contents: vec![],
            timeseries: vec![],
            requests: vec![],
        }
    }

    #[test]
    fn round12_keeps_twelve_digits() {
        assert_eq!(round12(0.1 + 0.2), 0.3);
        assert_eq!(round12(1.0 / 3.0), 0.333333333333);
        assert_eq!(round12(123456789012345.0), 123456789012000.0);
        assert_eq!(fmt_num(-0.0), "0");
        assert_eq!(fmt_num(40.0), "40");
        assert_eq!(fmt_num(2.5e-7), "0.00000025");
    }

    #[test]
    fn empty_summary_is_zeroed() {
        let v = empty_report().summary_value();
        assert_eq!(v["ledger"]["request_count"], 0);
        assert_eq!(v["ledger"]["total_wh"], 0.0);
        assert_eq!(v["hits"]["hit_rate"], 0.0);
    }

    #[test]
    fn summary_keys_are_sorted() {
        let s = empty_report().summary_json();
        let a = s.find("\"clusters\"").unwrap();
        let b = s.find("\"hits\"").unwrap();
        let c = s.find("\"metadata\"").unwrap();
        assert!(a < b && b < c);
        assert_eq!(s, empty_report().summary_json());
    }

    #[test]
    fn zero_ticks_is_header_only() {
        let r = empty_report();
        assert_eq!(r.timeseries_csv(), format!("{TIMESERIES_HEADER}\n"));
        assert_eq!(r.requests_csv(), format!("{REQUESTS_HEADER}\n"));
    }

    #[test]
    fn io_error_names_path() {
        let err = write_summary_json(&empty_report(), "/nonexistent-dir/summary.json").unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/summary.json"));
    }
}
