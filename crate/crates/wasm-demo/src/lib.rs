//! Browser bindings for the interactive demo page in `www/`.
//!
//! Each export takes and returns JSON strings. The `*_json` functions hold
//! the logic so they can be tested natively; the `#[wasm_bindgen]` wrappers
//! only convert errors to `JsError`.

use cdn_energy::energy::{
    device_download_energy_with_mode, device_power, download_usage, transport_storage_energy, TransportContext,
};
use cdn_energy::scenario::{DeviceEnergyMode, EquipmentProfile, Scenario, WirelessDeviceProfile};
use serde_json::{json, Map, Value};
use wasm_bindgen::prelude::*;

const REFERENCE_SCENARIO: &str = include_str!("../../../scenarios/reference.json");

fn parse<T: serde::de::DeserializeOwned>(what: &str, raw: &str) -> Result<T, String> {
    serde_json::from_str(raw).map_err(|e| format!("{what}: {e}"))
}

/// Transport energy and its per-class split for every hop count `0..=max_hops`.
pub fn transport_curve_json(
    equipment: &str,
    size_bits: f64,
    replicas: u32,
    downloads_per_hr: f64,
    max_hops: u32,
) -> Result<String, String> {
    let eq: EquipmentProfile = parse("equipment", equipment)?;
    if let Some(v) = eq.validate("equipment").first() {
        return Err(v.to_string());
    }
    let mut points = Vec::new();
    for hops in 0..=max_hops {
        let ctx = TransportContext::new(size_bits, hops, replicas, downloads_per_hr, &eq).map_err(|e| e.to_string())?;
        let (total, breakdown) = transport_storage_energy(&ctx);
        let mut classes = Map::new();
        for (class, wh) in breakdown.classes() {
            classes.insert(class.name().to_string(), wh.into());
        }
        points.push(json!({"hops": hops, "total_wh": total, "classes": classes}));
    }
    Ok(Value::Array(points).to_string())
}

/// Device power and download energy of one content across `steps` bitrates
/// spaced evenly in `[lo_bps, hi_bps]`. Bitrates above the PHY rate are
/// skipped.
pub fn device_curve_json(
    profile: &str,
    size_bits: f64,
    lo_bps: f64,
    hi_bps: f64,
    steps: u32,
) -> Result<String, String> {
    let p: WirelessDeviceProfile = parse("profile", profile)?;
    if let Some(v) = p.validate("profile").first() {
        return Err(v.to_string());
    }
    if !(lo_bps > 0.0 && hi_bps >= lo_bps && steps >= 1) {
        return Err("bitrate range must satisfy 0 < lo <= hi and steps >= 1".into());
    }
    let mut points = Vec::new();
    for i in 0..steps {
        let frac = if steps == 1 { 0.0 } else { f64::from(i) / f64::from(steps - 1) };
        let bitrate = lo_bps + frac * (hi_bps - lo_bps);
        let Ok(usage) = download_usage(&p, bitrate) else { continue };
        let (full_wh, duration_s) = device_download_energy_with_mode(&p, size_bits, bitrate, DeviceEnergyMode::Full)
            .map_err(|e| e.to_string())?;
        let (incremental_wh, _) =
            device_download_energy_with_mode(&p, size_bits, bitrate, DeviceEnergyMode::Incremental)
                .map_err(|e| e.to_string())?;
        points.push(json!({
            "bitrate_bps": bitrate,
            "power_w": device_power(&p, &usage),
            "duration_s": duration_s,
            "full_wh": full_wh,
            "incremental_wh": incremental_wh,
        }));
    }
    Ok(Value::Array(points).to_string())
}

/// Runs the scenario once per edge capacity and reports energy and hit rate.
pub fn edge_capacity_sweep_json(scenario: &str, seed: u64, capacities: &str) -> Result<String, String> {
    let base = Scenario::from_slice(scenario.as_bytes()).map_err(|e| e.to_string())?;
    let base = Scenario { seed, ..base };
    let caps: Vec<f64> = parse("capacities", capacities)?;
    let mut points = Vec::new();
    for cap in caps {
        if !(cap >= 0.0 && cap.is_finite()) {
            return Err(format!("capacity {cap} must be finite and >= 0"));
        }
        let report = cdn_energy::run(&base.with_edge_capacity(cap as u64));
        let ledger = &report.aggregate;
        points.push(json!({
            "capacity_bits": cap,
            "transport_wh": ledger.transport_wh(),
            "total_wh": ledger.total_wh(),
            "hit_rate": report.hits.hit_rate(),
            "requests": ledger.request_count(),
        }));
    }
    Ok(Value::Array(points).to_string())
}

#[wasm_bindgen]
pub fn reference_scenario() -> String {
    REFERENCE_SCENARIO.to_string()
}

#[wasm_bindgen]
pub fn transport_curve(
    equipment: &str,
    size_bits: f64,
    replicas: u32,
    downloads_per_hr: f64,
    max_hops: u32,
) -> Result<String, JsError> {
    transport_curve_json(equipment, size_bits, replicas, downloads_per_hr, max_hops).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn device_curve(profile: &str, size_bits: f64, lo_bps: f64, hi_bps: f64, steps: u32) -> Result<String, JsError> {
    device_curve_json(profile, size_bits, lo_bps, hi_bps, steps).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn edge_capacity_sweep(scenario: &str, seed: u64, capacities: &str) -> Result<String, JsError> {
    edge_capacity_sweep_json(scenario, seed, capacities).map_err(|e| JsError::new(&e))
}
