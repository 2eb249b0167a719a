//! Scenario model: every input type of a simulation run and the JSON loader.
//!
//! A scenario document has six top-level keys: `topology`, `equipment`,
//! `content_space`, `user_space`, `policies` and `simulation`. Units are
//! carried in field names (`*_w`, `*_bps`, `*_bits`, `*_s`, `*_j`). Unknown
//! keys are rejected so that typos surface as errors instead of silently
//! falling back to defaults.
//!
//! Loading happens in two passes: `serde` checks shape and types (reporting
//! line/column on failure), then [`Scenario::from_document`] checks every
//! value constraint and cross-reference, collecting all violations.

mod topology;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use self::topology::{
    CachePolicy, CdnNode, ClientCluster, ClusterDoc, ClusterIdx, NodeDoc, NodeIdx, RootPath, Tier, Topology,
    TopologyError,
};
use crate::energy::DecodeModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    Constraint,
    DanglingReference,
}

/// One failed validation rule, tied to a dotted field path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub message: String,
    pub kind: ViolationKind,
}

impl Violation {
    pub fn constraint(field: impl Into<String>, message: impl Into<String>) -> Self {
        Violation { field: field.into(), message: message.into(), kind: ViolationKind::Constraint }
    }

    pub fn dangling(field: impl Into<String>, message: impl Into<String>) -> Self {
        Violation { field: field.into(), message: message.into(), kind: ViolationKind::DanglingReference }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("{} validation error(s)", .0.len())]
    Invalid(Vec<Violation>),
}

impl ScenarioError {
    pub fn violations(&self) -> &[Violation] {
        match self {
            ScenarioError::Invalid(v) => v,
            _ => &[],
        }
    }

    pub fn has_dangling_reference(&self) -> bool {
        self.violations().iter().any(|v| v.kind == ViolationKind::DanglingReference)
    }
}

impl From<serde_json::Error> for ScenarioError {
    fn from(e: serde_json::Error) -> Self {
        ScenarioError::Parse { line: e.line(), column: e.column(), message: e.to_string() }
    }
}

fn finite_nonneg(x: f64) -> bool {
    x.is_finite() && x >= 0.0
}

fn finite_pos(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

/// Power (W) and capacity (bit/s) of each network equipment class plus the
/// data-centre storage power (W) and capacity (bits).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquipmentProfile {
    pub es_power_w: f64,
    pub es_capacity_bps: f64,
    pub g_power_w: f64,
    pub g_capacity_bps: f64,
    pub pe_power_w: f64,
    pub pe_capacity_bps: f64,
    pub c_power_w: f64,
    pub c_capacity_bps: f64,
    pub wdm_power_w: f64,
    pub wdm_capacity_bps: f64,
    pub sr_power_w: f64,
    pub sr_capacity_bps: f64,
    pub sd_power_w: f64,
    pub sd_capacity_bits: f64,
}

impl EquipmentProfile {
    fn fields(&self) -> [(&'static str, f64, bool); 14] {
        // (name, value, is_capacity)
        [
            ("es_power_w", self.es_power_w, false),
            ("es_capacity_bps", self.es_capacity_bps, true),
            ("g_power_w", self.g_power_w, false),
            ("g_capacity_bps", self.g_capacity_bps, true),
            ("pe_power_w", self.pe_power_w, false),
            ("pe_capacity_bps", self.pe_capacity_bps, true),
            ("c_power_w", self.c_power_w, false),
            ("c_capacity_bps", self.c_capacity_bps, true),
            ("wdm_power_w", self.wdm_power_w, false),
            ("wdm_capacity_bps", self.wdm_capacity_bps, true),
            ("sr_power_w", self.sr_power_w, false),
            ("sr_capacity_bps", self.sr_capacity_bps, true),
            ("sd_power_w", self.sd_power_w, false),
            ("sd_capacity_bits", self.sd_capacity_bits, true),
        ]
    }

    pub fn validate(&self, prefix: &str) -> Vec<Violation> {
        self.fields()
            .into_iter()
            .filter_map(|(name, v, is_cap)| {
                if is_cap && !finite_pos(v) {
                    Some(Violation::constraint(format!("{prefix}{name}"), "capacity must be finite and > 0"))
                } else if !is_cap && !finite_nonneg(v) {
                    Some(Violation::constraint(format!("{prefix}{name}"), "power must be finite and >= 0"))
                } else {
                    None
                }
            })
            .collect()
    }
}

/// Parameters of the 802.11 device power model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WirelessDeviceProfile {
    pub rho_idle_w: f64,
    pub rho_tx_w: f64,
    pub rho_rx_w: f64,
    /// Per-frame processing energy at the transmitter (J/frame).
    pub gamma_xg_j: f64,
    /// Per-frame processing energy at the receiver (J/frame).
    pub gamma_xr_j: f64,
    pub phy_rate_bps: f64,
    pub frame_payload_bits: f64,
}

impl WirelessDeviceProfile {
    pub fn validate(&self, prefix: &str) -> Vec<Violation> {
        let mut errs = Vec::new();
        for (name, v) in [
            ("rho_idle_w", self.rho_idle_w),
            ("rho_tx_w", self.rho_tx_w),
            ("rho_rx_w", self.rho_rx_w),
            ("gamma_xg_j", self.gamma_xg_j),
            ("gamma_xr_j", self.gamma_xr_j),
        ] {
            if !finite_nonneg(v) {
                errs.push(Violation::constraint(format!("{prefix}{name}"), "must be finite and >= 0"));
            }
        }
        for (name, v) in [("phy_rate_bps", self.phy_rate_bps), ("frame_payload_bits", self.frame_payload_bits)] {
            if !finite_pos(v) {
                errs.push(Violation::constraint(format!("{prefix}{name}"), "must be finite and > 0"));
            }
        }
        errs
    }
}

/// Sampling distribution for non-negative content attributes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Distribution {
    Constant { value: f64 },
    Uniform { lo: f64, hi: f64 },
    Lognormal { mu: f64, sigma: f64 },
}

impl Distribution {
    fn validate(&self, field: &str, strictly_positive: bool) -> Vec<Violation> {
        let ok = |x: f64| if strictly_positive { finite_pos(x) } else { finite_nonneg(x) };
        let bound = if strictly_positive { "> 0" } else { ">= 0" };
        match *self {
            Distribution::Constant { value } if !ok(value) => {
                vec![Violation::constraint(format!("{field}.value"), format!("must be finite and {bound}"))]
            }
            Distribution::Uniform { lo, hi } if !(ok(lo) && hi.is_finite() && hi >= lo) => {
                vec![Violation::constraint(field.to_string(), format!("requires {bound} lo <= hi, both finite"))]
            }
            Distribution::Lognormal { mu, sigma } if !(mu.is_finite() && finite_nonneg(sigma)) => {
                vec![Violation::constraint(field.to_string(), "requires finite mu and sigma >= 0")]
            }
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum PopularityShape {
    #[default]
    Constant,
    LinearDecay,
    ExponentialDecay {
        half_life_s: f64,
    },
}

fn default_replicas() -> u32 {
    1
}

fn default_cohort() -> f64 {
    0.5
}

fn default_publish_window() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContentSpaceConfig {
    pub catalog_size: usize,
    pub zipf_exponent: f64,
    pub size_bits: Distribution,
    pub bitrate_bps: f64,
    pub lifetime_s: Distribution,
    #[serde(default)]
    pub popularity_shape: PopularityShape,
    /// Copies kept in data centres (R).
    #[serde(default = "default_replicas")]
    pub replication_count: u32,
    #[serde(default)]
    pub decode: DecodeModel,
    /// Fraction of the catalog already published at t = 0.
    #[serde(default = "default_cohort")]
    pub initial_cohort_fraction: f64,
    /// The rest is published uniformly over this fraction of the horizon.
    #[serde(default = "default_publish_window")]
    pub publish_window_fraction: f64,
}

impl ContentSpaceConfig {
    fn validate(&self) -> Vec<Violation> {
        let p = "content_space";
        let mut errs = Vec::new();
        if self.catalog_size < 1 {
            errs.push(Violation::constraint(format!("{p}.catalog_size"), "must be >= 1"));
        }
        if !finite_pos(self.zipf_exponent) {
            errs.push(Violation::constraint(format!("{p}.zipf_exponent"), "must be finite and > 0"));
        }
        errs.extend(self.size_bits.validate(&format!("{p}.size_bits"), false));
        errs.extend(self.lifetime_s.validate(&format!("{p}.lifetime_s"), true));
        if !finite_pos(self.bitrate_bps) {
            errs.push(Violation::constraint(format!("{p}.bitrate_bps"), "must be finite and > 0"));
        }
        if let PopularityShape::ExponentialDecay { half_life_s } = self.popularity_shape {
            if !finite_pos(half_life_s) {
                errs.push(Violation::constraint(format!("{p}.popularity_shape.half_life_s"), "must be finite and > 0"));
            }
        }
        if self.replication_count < 1 {
            errs.push(Violation::constraint(format!("{p}.replication_count"), "must be >= 1"));
        }
        if !finite_nonneg(self.decode.alpha_j) {
            errs.push(Violation::constraint(format!("{p}.decode.alpha_j"), "must be finite and >= 0"));
        }
        if !finite_nonneg(self.decode.beta_j_per_bit) {
            errs.push(Violation::constraint(format!("{p}.decode.beta_j_per_bit"), "must be finite and >= 0"));
        }
        for (name, v) in [
            ("initial_cohort_fraction", self.initial_cohort_fraction),
            ("publish_window_fraction", self.publish_window_fraction),
        ] {
            if !(0.0..=1.0).contains(&v) {
                errs.push(Violation::constraint(format!("{p}.{name}"), "must lie in [0, 1]"));
            }
        }
        errs
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserSpaceDoc {
    #[serde(default)]
    pub device_profiles: BTreeMap<String, WirelessDeviceProfile>,
    pub clusters: Vec<ClusterDoc>,
}

/// How the wireless device power is attributed to a download.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviceEnergyMode {
    /// Full device power, idle share included, over the download duration.
    #[default]
    Full,
    /// Only the increment above idle power.
    Incremental,
}

fn default_period() -> f64 {
    600.0
}

fn default_smoothing() -> f64 {
    0.5
}

fn default_window() -> f64 {
    3600.0
}

/// Push-replication of predicted-popular content into edge caches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplicationPolicyConfig {
    /// Predicted requests/hr above which content is pushed. Absent disables
    /// replication entirely.
    #[serde(default)]
    pub threshold_per_hr: Option<f64>,
    #[serde(default = "default_period")]
    pub period_s: f64,
    /// EWMA smoothing factor in (0, 1].
    #[serde(default = "default_smoothing")]
    pub smoothing: f64,
    #[serde(default = "default_window")]
    pub window_s: f64,
}

impl Default for ReplicationPolicyConfig {
    fn default() -> Self {
        ReplicationPolicyConfig {
            threshold_per_hr: None,
            period_s: default_period(),
            smoothing: default_smoothing(),
            window_s: default_window(),
        }
    }
}

impl ReplicationPolicyConfig {
    fn validate(&self) -> Vec<Violation> {
        let p = "policies.replication";
        let mut errs = Vec::new();
        if let Some(t) = self.threshold_per_hr {
            if t.is_nan() || t < 0.0 {
                errs.push(Violation::constraint(format!("{p}.threshold_per_hr"), "must be >= 0"));
            }
        }
        if !finite_pos(self.period_s) {
            errs.push(Violation::constraint(format!("{p}.period_s"), "must be finite and > 0"));
        }
        if !(self.smoothing > 0.0 && self.smoothing <= 1.0) {
            errs.push(Violation::constraint(format!("{p}.smoothing"), "must lie in (0, 1]"));
        }
        if !finite_pos(self.window_s) {
            errs.push(Violation::constraint(format!("{p}.window_s"), "must be finite and > 0"));
        }
        errs
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoliciesDoc {
    #[serde(default)]
    pub device_energy_mode: DeviceEnergyMode,
    #[serde(default)]
    pub replication: ReplicationPolicyConfig,
}

fn default_report_interval() -> f64 {
    3600.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationDoc {
    pub horizon_s: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_report_interval")]
    pub report_interval_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyDoc {
    pub nodes: Vec<NodeDoc>,
}

/// The scenario document exactly as it appears on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    pub topology: TopologyDoc,
    pub equipment: EquipmentProfile,
    pub content_space: ContentSpaceConfig,
    pub user_space: UserSpaceDoc,
    #[serde(default)]
    pub policies: PoliciesDoc,
    pub simulation: SimulationDoc,
}

/// A fully validated scenario. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub topology: Topology,
    pub equipment: EquipmentProfile,
    pub device_profiles: BTreeMap<String, WirelessDeviceProfile>,
    pub content_space: ContentSpaceConfig,
    pub replication: ReplicationPolicyConfig,
    pub device_energy_mode: DeviceEnergyMode,
    pub horizon_s: f64,
    pub seed: u64,
    pub report_interval_s: f64,
    /// SHA-256 of the canonical (sorted-key, defaults applied) document.
    pub hash: String,
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| ScenarioError::Io { path: path.to_path_buf(), source })?;
    Scenario::from_slice(&bytes)
}

impl Scenario {
    pub fn from_slice(bytes: &[u8]) -> Result<Self, ScenarioError> {
        let doc: ScenarioDocument = serde_json::from_slice(bytes)?;
        Self::from_document(doc)
    }

    pub fn from_value(value: serde_json::Value) -> Result<Self, ScenarioError> {
        let doc: ScenarioDocument = serde_json::from_value(value)?;
        Self::from_document(doc)
    }

    pub fn from_document(doc: ScenarioDocument) -> Result<Self, ScenarioError> {
        let mut errs = doc.equipment.validate("equipment.");
        for (name, profile) in &doc.user_space.device_profiles {
            errs.extend(profile.validate(&format!("user_space.device_profiles.{name}.")));
        }
        errs.extend(doc.content_space.validate());
        errs.extend(doc.policies.replication.validate());

        let sim = &doc.simulation;
        if !finite_pos(sim.horizon_s) {
            errs.push(Violation::constraint("simulation.horizon_s", "must be finite and > 0"));
        }
        if !finite_pos(sim.report_interval_s) {
            errs.push(Violation::constraint("simulation.report_interval_s", "must be finite and > 0"));
        }

        let topology =
            match Topology::from_docs(&doc.topology.nodes, &doc.user_space.clusters, &doc.user_space.device_profiles) {
                Ok(t) => Some(t),
                Err(v) => {
                    errs.extend(v);
                    None
                }
            };

        // A wireless download cannot stream faster than the PHY rate.
        for (i, c) in doc.user_space.clusters.iter().enumerate() {
            if let Some(p) = c.device_profile.as_ref().and_then(|n| doc.user_space.device_profiles.get(n)) {
                if p.phy_rate_bps < doc.content_space.bitrate_bps {
                    errs.push(Violation::constraint(
                        format!("user_space.clusters[{i}].device_profile"),
                        format!(
                            "phy_rate_bps {} of profile `{}` is below content_space.bitrate_bps {}",
                            p.phy_rate_bps,
                            c.device_profile.as_deref().unwrap_or_default(),
                            doc.content_space.bitrate_bps
                        ),
                    ));
                }
            }
        }

        if !errs.is_empty() {
            return Err(ScenarioError::Invalid(errs));
        }

        let canonical = serde_json::to_vec(&serde_json::to_value(&doc)?)?;
        let hash = Sha256::digest(&canonical).iter().map(|b| format!("{b:02x}")).collect();

        Ok(Scenario {
            topology: topology.expect("topology validated"),
            equipment: doc.equipment,
            device_profiles: doc.user_space.device_profiles,
            content_space: doc.content_space,
            replication: doc.policies.replication,
            device_energy_mode: doc.policies.device_energy_mode,
            horizon_s: sim.horizon_s,
            seed: sim.seed,
            report_interval_s: sim.report_interval_s,
            hash,
        })
    }

    /// Copy of the scenario with every non-origin cache set to zero capacity.
    pub fn without_surrogate_caches(&self) -> Scenario {
        self.with_surrogate_capacity(0)
    }

    /// Copy of the scenario with every edge cache resized to `bits`.
    pub fn with_edge_capacity(&self, bits: u64) -> Scenario {
        let mut s = self.clone();
        let edges: Vec<NodeIdx> = s.topology.edge_nodes().collect();
        for e in edges {
            s.topology.set_cache_capacity(e, bits);
        }
        s
    }

    fn with_surrogate_capacity(&self, bits: u64) -> Scenario {
        let mut s = self.clone();
        let origin = s.topology.origin();
        for i in 0..s.topology.nodes().len() {
            if NodeIdx(i) != origin {
                s.topology.set_cache_capacity(NodeIdx(i), bits);
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    pub(crate) fn minimal_doc() -> serde_json::Value {
        json!({
            "topology": {"nodes": [
                {"id": "origin", "tier": "origin"},
                {"id": "edge-1", "tier": "edge", "parent": "origin", "hop_contribution": 2,
                 "cache_capacity_bits": 1e9}
            ]},
            "equipment": {
                "es_power_w": 1.0, "es_capacity_bps": 1e9,
                "g_power_w": 1.0, "g_capacity_bps": 1e9,
                "pe_power_w": 1.0, "pe_capacity_bps": 1e9,
                "c_power_w": 1.0, "c_capacity_bps": 1e9,
                "wdm_power_w": 1.0, "wdm_capacity_bps": 1e9,
                "sr_power_w": 1.0, "sr_capacity_bps": 1e9,
                "sd_power_w": 1.0, "sd_capacity_bits": 1e12
            },
            "content_space": {
                "catalog_size": 10, "zipf_exponent": 1.0,
                "size_bits": {"kind": "constant", "value": 1e6},
                "bitrate_bps": 1e6,
                "lifetime_s": {"kind": "constant", "value": 1e6}
            },
            "user_space": {"clusters": [
                {"id": "c1", "edge": "edge-1", "user_count": 10, "request_rate_per_user_per_hr": 1.0}
            ]},
            "simulation": {"horizon_s": 3600.0, "seed": 1}
        })
    }

    #[test]
    fn minimal_document_loads() {
        let s = Scenario::from_value(minimal_doc()).unwrap();
        assert_eq!(s.topology.nodes().len(), 2);
        assert_eq!(s.topology.clusters().len(), 1);
        assert_eq!(s.content_space.replication_count, 1);
        assert_eq!(s.content_space.initial_cohort_fraction, 0.5);
        assert_eq!(s.report_interval_s, 3600.0);
        assert_eq!(s.device_energy_mode, DeviceEnergyMode::Full);
        assert!(s.replication.threshold_per_hr.is_none());
        assert_eq!(s.topology.cluster(ClusterIdx(0)).diurnal_profile, [1.0; 24]);
    }

    #[test]
    fn zero_capacity_names_the_field() {
        let mut doc = minimal_doc();
        doc["equipment"]["es_capacity_bps"] = json!(0.0);
        let err = Scenario::from_value(doc).unwrap_err();
        let v = err.violations();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].field, "equipment.es_capacity_bps");
    }

    #[test]
    fn dangling_cluster_edge() {
        let mut doc = minimal_doc();
        doc["user_space"]["clusters"][0]["edge"] = json!("edge-9");
        let err = Scenario::from_value(doc).unwrap_err();
        assert!(err.has_dangling_reference());
        assert!(err.violations()[0].message.contains("edge-9"));
    }

    #[test]
    fn dangling_device_profile() {
        let mut doc = minimal_doc();
        doc["user_space"]["clusters"][0]["device_profile"] = json!("phone");
        assert!(Scenario::from_value(doc).unwrap_err().has_dangling_reference());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut doc = minimal_doc();
        doc["equipment"]["es_powr_w"] = json!(1.0);
        assert!(matches!(Scenario::from_value(doc), Err(ScenarioError::Parse { .. })));

        let mut doc = minimal_doc();
        doc["content_space"]["size_bits"]["extra"] = json!(1.0);
        assert!(matches!(Scenario::from_value(doc), Err(ScenarioError::Parse { .. })));

        let mut doc = minimal_doc();
        doc["content_space"]["popularity_shape"] = json!({"shape": "exponential_decay", "half_life_s": 10.0, "x": 1});
        assert!(matches!(Scenario::from_value(doc), Err(ScenarioError::Parse { .. })));
    }

    #[test]
    fn parse_error_carries_position() {
        let err = Scenario::from_slice(b"{\n  \"topology\": [,\n}").unwrap_err();
        match err {
            ScenarioError::Parse { line, column, .. } => {
                assert_eq!(line, 2);
                assert!(column > 0);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn collects_multiple_violations() {
        let mut doc = minimal_doc();
        doc["equipment"]["g_capacity_bps"] = json!(-1.0);
        doc["equipment"]["c_power_w"] = json!(-1.0);
        doc["simulation"]["horizon_s"] = json!(0.0);
        doc["content_space"]["zipf_exponent"] = json!(0.0);
        let err = Scenario::from_value(doc).unwrap_err();
        let fields: Vec<&str> = err.violations().iter().map(|v| v.field.as_str()).collect();
        for f in
            ["equipment.g_capacity_bps", "equipment.c_power_w", "simulation.horizon_s", "content_space.zipf_exponent"]
        {
            assert!(fields.contains(&f), "missing {f} in {fields:?}");
        }
    }

    #[test]
    fn phy_rate_below_bitrate_is_rejected() {
        let mut doc = minimal_doc();
        doc["user_space"]["device_profiles"] = json!({"phone": {
            "rho_idle_w": 0.8, "rho_tx_w": 1.9, "rho_rx_w": 1.4,
            "gamma_xg_j": 1e-4, "gamma_xr_j": 5e-5,
            "phy_rate_bps": 5e5, "frame_payload_bits": 12000.0
        }});
        doc["user_space"]["clusters"][0]["device_profile"] = json!("phone");
        let err = Scenario::from_value(doc).unwrap_err();
        assert!(err.violations()[0].message.contains("phy_rate_bps"));
    }

    #[test]
    fn diurnal_profile_rules() {
        let mut doc = minimal_doc();
        doc["user_space"]["clusters"][0]["diurnal_profile"] = json!(vec![0.0; 24]);
        assert!(Scenario::from_value(doc).is_err());
        let mut doc = minimal_doc();
        doc["user_space"]["clusters"][0]["diurnal_profile"] = json!(vec![1.0; 23]);
        assert!(Scenario::from_value(doc).is_err());
    }

    #[test]
    fn hash_is_a_function_of_content() {
        let a = Scenario::from_value(minimal_doc()).unwrap();
        let b = Scenario::from_slice(serde_json::to_string_pretty(&minimal_doc()).unwrap().as_bytes()).unwrap();
        assert_eq!(a, b);
        let mut doc = minimal_doc();
        doc["simulation"]["seed"] = json!(2);
        assert_ne!(Scenario::from_value(doc).unwrap().hash, a.hash);
    }

    #[test]
    fn surrogate_cache_toggles() {
        let s = Scenario::from_value(minimal_doc()).unwrap();
        let off = s.without_surrogate_caches();
        assert!(off.topology.nodes().iter().all(|n| n.cache_capacity_bits == 0));
        let big = s.with_edge_capacity(42);
        assert_eq!(big.topology.node(NodeIdx(1)).cache_capacity_bits, 42);
    }

    /// Mutates one numeric leaf of the minimal document at a time.
    fn numeric_leaves(v: &serde_json::Value, path: String, out: &mut Vec<String>) {
        match v {
            serde_json::Value::Object(m) => {
                for (k, c) in m {
                    numeric_leaves(c, format!("{path}/{k}"), out);
                }
            }
            serde_json::Value::Array(a) => {
                for (i, c) in a.iter().enumerate() {
                    numeric_leaves(c, format!("{path}/{i}"), out);
                }
            }
            serde_json::Value::Number(_) => out.push(path),
            _ => {}
        }
    }

    fn assert_invariants(s: &Scenario) {
        let e = &s.equipment;
        for (_, v, is_cap) in e.fields() {
            assert!(if is_cap { v > 0.0 } else { v >= 0.0 });
        }
        assert!(s.horizon_s > 0.0 && s.report_interval_s > 0.0);
        assert!(s.content_space.catalog_size >= 1 && s.content_space.zipf_exponent > 0.0);
        assert!(s.content_space.replication_count >= 1);
        let t = &s.topology;
        assert_eq!(t.nodes().iter().filter(|n| n.tier == Tier::Origin).count(), 1);
        for (ci, c) in t.clusters().iter().enumerate() {
            assert!(c.user_count >= 1);
            assert_eq!(t.node(c.edge).tier, Tier::Edge);
            assert!(c.diurnal_profile.iter().all(|m| *m >= 0.0));
            assert!(c.diurnal_profile.iter().any(|m| *m > 0.0));
            assert!(t.hops_to_cluster(t.origin(), ClusterIdx(ci)).is_some());
        }
    }

    proptest::proptest! {
        #[test]
        fn accepted_documents_satisfy_invariants(
            pick in 0usize..64,
            value in proptest::prop_oneof![
                proptest::num::f64::ANY,
                -10.0f64..10.0,
                proptest::strategy::Just(0.0),
            ],
        ) {
            let base = minimal_doc();
            let mut leaves = Vec::new();
            numeric_leaves(&base, String::new(), &mut leaves);
            let mut doc = base.clone();
            let path = &leaves[pick % leaves.len()];
            if let Some(slot) = doc.pointer_mut(path) {
                *slot = serde_json::Number::from_f64(value).map_or(serde_json::Value::Null, Into::into);
            }
            if let Ok(s) = Scenario::from_value(doc) {
                assert_invariants(&s);
            }
        }
    }
}
