//! Energy models: macroscopic transport/storage energy per download, the
//! 802.11 device power model, and a per-playback decoding charge.
//!
//! All functions return watt-hours unless named otherwise.

mod ledger;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use self::ledger::{EnergyClass, EnergyLedger};
use crate::scenario::{DeviceEnergyMode, EquipmentProfile, WirelessDeviceProfile};

const SECONDS_PER_HOUR: f64 = 3600.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnergyError {
    #[error("negative or non-finite energy {wh} Wh for class {class}")]
    NegativeEnergy { class: EnergyClass, wh: f64 },
    #[error("bitrate {bitrate_bps} bit/s exceeds PHY rate {phy_rate_bps} bit/s")]
    RateExceedsPhy { bitrate_bps: f64, phy_rate_bps: f64 },
    #[error("invalid {field}: {value}")]
    InvalidInput { field: &'static str, value: f64 },
}

/// Per-download inputs of the transport/storage model that are not
/// equipment properties.
#[derive(Debug, Clone, Copy)]
pub struct TransportContext<'a> {
    size_bits: f64,
    hops: u32,
    replicas: u32,
    downloads_per_hr: f64,
    equipment: &'a EquipmentProfile,
}

impl<'a> TransportContext<'a> {
    pub fn new(
        size_bits: f64,
        hops: u32,
        replicas: u32,
        downloads_per_hr: f64,
        equipment: &'a EquipmentProfile,
    ) -> Result<Self, EnergyError> {
        if !(size_bits.is_finite() && size_bits >= 0.0) {
            return Err(EnergyError::InvalidInput { field: "size_bits", value: size_bits });
        }
        if replicas < 1 {
            return Err(EnergyError::InvalidInput { field: "replicas", value: f64::from(replicas) });
        }
        if !(downloads_per_hr.is_finite() && downloads_per_hr > 0.0) {
            return Err(EnergyError::InvalidInput { field: "downloads_per_hr", value: downloads_per_hr });
        }
        Ok(TransportContext { size_bits, hops, replicas, downloads_per_hr, equipment })
    }

    pub fn size_bits(&self) -> f64 {
        self.size_bits
    }

    pub fn hops(&self) -> u32 {
        self.hops
    }

    pub fn replicas(&self) -> u32 {
        self.replicas
    }

    pub fn downloads_per_hr(&self) -> f64 {
        self.downloads_per_hr
    }
}

/// Transport/storage energy split by equipment class (Wh).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TransportBreakdown {
    pub switching: f64,
    pub gateway: f64,
    pub provider_edge: f64,
    pub core: f64,
    pub wdm: f64,
    pub server: f64,
    pub storage: f64,
}

impl TransportBreakdown {
    pub fn classes(&self) -> [(EnergyClass, f64); 7] {
        [
            (EnergyClass::Switching, self.switching),
            (EnergyClass::Gateway, self.gateway),
            (EnergyClass::ProviderEdge, self.provider_edge),
            (EnergyClass::Core, self.core),
            (EnergyClass::Wdm, self.wdm),
            (EnergyClass::Server, self.server),
            (EnergyClass::Storage, self.storage),
        ]
    }

    /// Sum in field order.
    pub fn total(&self) -> f64 {
        self.switching + self.gateway + self.provider_edge + self.core + self.wdm + self.server + self.storage
    }
}

/// Energy of one download through the network plus its amortised share of
/// replicated data-centre storage:
///
/// ```text
/// 4·(B/3600)·(3·P_ES/C_ES + P_G/C_G + 2·P_PE/C_PE + (H+1)·P_C/C_C + H·P_WDM/C_WDM + P_SR/C_SR)
///   + 2·(B·R/D)·(P_SD/S_SD)
/// ```
///
/// The leading factors are folded into each class so that the breakdown sums
/// to the returned total.
pub fn transport_storage_energy(ctx: &TransportContext<'_>) -> (f64, TransportBreakdown) {
    let e = ctx.equipment;
    let b = ctx.size_bits;
    let h = f64::from(ctx.hops);
    let scale = 4.0 * (b / SECONDS_PER_HOUR);
    let breakdown = TransportBreakdown {
        switching: scale * (3.0 * e.es_power_w / e.es_capacity_bps),
        gateway: scale * (e.g_power_w / e.g_capacity_bps),
        provider_edge: scale * (2.0 * e.pe_power_w / e.pe_capacity_bps),
        core: scale * ((h + 1.0) * e.c_power_w / e.c_capacity_bps),
        wdm: scale * (h * e.wdm_power_w / e.wdm_capacity_bps),
        server: scale * (e.sr_power_w / e.sr_capacity_bps),
        storage: 2.0 * (b * f64::from(ctx.replicas) / ctx.downloads_per_hr) * (e.sd_power_w / e.sd_capacity_bits),
    };
    (breakdown.total(), breakdown)
}

/// Radio activity of a wireless device.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AirtimeUsage {
    pub tau_tx: f64,
    pub tau_rx: f64,
    pub lambda_g_fps: f64,
    pub lambda_r_fps: f64,
}

impl AirtimeUsage {
    pub fn new(tau_tx: f64, tau_rx: f64, lambda_g_fps: f64, lambda_r_fps: f64) -> Result<Self, EnergyError> {
        for (field, v) in
            [("tau_tx", tau_tx), ("tau_rx", tau_rx), ("lambda_g_fps", lambda_g_fps), ("lambda_r_fps", lambda_r_fps)]
        {
            if !(v.is_finite() && v >= 0.0) {
                return Err(EnergyError::InvalidInput { field, value: v });
            }
        }
        if tau_tx + tau_rx > 1.0 {
            return Err(EnergyError::InvalidInput { field: "tau_tx + tau_rx", value: tau_tx + tau_rx });
        }
        Ok(AirtimeUsage { tau_tx, tau_rx, lambda_g_fps, lambda_r_fps })
    }
}

/// Instantaneous power of an 802.11 device (W).
pub fn device_power(p: &WirelessDeviceProfile, u: &AirtimeUsage) -> f64 {
    p.rho_idle_w
        + p.rho_tx_w * u.tau_tx
        + p.rho_rx_w * u.tau_rx
        + p.gamma_xg_j * u.lambda_g_fps
        + p.gamma_xr_j * u.lambda_r_fps
}

/// Receive-only usage of a device streaming at `bitrate_bps`.
pub fn download_usage(p: &WirelessDeviceProfile, bitrate_bps: f64) -> Result<AirtimeUsage, EnergyError> {
    if !(bitrate_bps.is_finite() && bitrate_bps > 0.0) {
        return Err(EnergyError::InvalidInput { field: "bitrate_bps", value: bitrate_bps });
    }
    if bitrate_bps > p.phy_rate_bps {
        return Err(EnergyError::RateExceedsPhy { bitrate_bps, phy_rate_bps: p.phy_rate_bps });
    }
    Ok(AirtimeUsage {
        tau_tx: 0.0,
        tau_rx: bitrate_bps / p.phy_rate_bps,
        lambda_g_fps: 0.0,
        lambda_r_fps: bitrate_bps / p.frame_payload_bits,
    })
}

/// Device energy (Wh) and duration (s) of downloading `size_bits` at
/// `bitrate_bps`, charging the full device power.
pub fn device_download_energy(
    p: &WirelessDeviceProfile,
    size_bits: f64,
    bitrate_bps: f64,
) -> Result<(f64, f64), EnergyError> {
    device_download_energy_with_mode(p, size_bits, bitrate_bps, DeviceEnergyMode::Full)
}

pub fn device_download_energy_with_mode(
    p: &WirelessDeviceProfile,
    size_bits: f64,
    bitrate_bps: f64,
    mode: DeviceEnergyMode,
) -> Result<(f64, f64), EnergyError> {
    let usage = download_usage(p, bitrate_bps)?;
    let duration_s = size_bits / bitrate_bps;
    let power = match mode {
        DeviceEnergyMode::Full => device_power(p, &usage),
        DeviceEnergyMode::Incremental => device_power(p, &usage) - p.rho_idle_w,
    };
    Ok((power * duration_s / SECONDS_PER_HOUR, duration_s))
}

/// Content-processing energy charged once per playback.
pub trait DecodeEnergy {
    fn decode_energy_wh(&self, size_bits: f64) -> f64;
}

/// Affine decoding cost: a fixed per-playback energy plus a per-bit term.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecodeModel {
    #[serde(default)]
    pub alpha_j: f64,
    #[serde(default)]
    pub beta_j_per_bit: f64,
}

impl DecodeEnergy for DecodeModel {
    fn decode_energy_wh(&self, size_bits: f64) -> f64 {
        (self.alpha_j + self.beta_j_per_bit * size_bits) / SECONDS_PER_HOUR
    }
}

pub fn decode_energy(model: &impl DecodeEnergy, size_bits: f64) -> f64 {
    model.decode_energy_wh(size_bits)
}


#[cfg(test)]
mod tests {
    use super::test_support::*;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_size_is_zero_energy() {
        let eq = uniform_equipment(3.0, 50.0, 1e3);
        let ctx = TransportContext::new(0.0, 7, 3, 2.0, &eq).unwrap();
        let (total, b) = transport_storage_energy(&ctx);
        assert_eq!(total, 0.0);
        assert!(b.classes().iter().all(|(_, v)| *v == 0.0));
    }

    #[test]
    fn unit_ratios_give_forty_wh() {
        let eq = uniform_equipment(1.0, 0.0, 1.0);
        let ctx = TransportContext::new(3600.0, 1, 1, 1.0, &eq).unwrap();
        let (total, b) = transport_storage_energy(&ctx);
        assert_eq!(total, 40.0);
        assert_eq!(b.switching, 12.0);
        assert_eq!(b.core, 8.0);
        assert_eq!(b.wdm, 4.0);
        assert_eq!(b.storage, 0.0);
    }

    #[test]
    fn iptv_scale_example() {
        let eq = uniform_equipment(1e-8, 1000.0, 1e15);
        let ctx = TransportContext::new(1e9, 5, 100, 1000.0, &eq).unwrap();
        let (total, b) = transport_storage_energy(&ctx);
        assert!((total - 0.2002).abs() / 0.2002 < 1e-6, "{total}");
        assert!((b.storage - 0.0002).abs() < 1e-12);
    }

    #[test]
    fn context_rejects_bad_inputs() {
        let eq = uniform_equipment(1.0, 0.0, 1.0);
        assert!(TransportContext::new(1.0, 0, 0, 1.0, &eq).is_err());
        assert!(TransportContext::new(1.0, 0, 1, 0.0, &eq).is_err());
        assert!(TransportContext::new(-1.0, 0, 1, 1.0, &eq).is_err());
    }

    #[test]
    fn idle_device_draws_idle_power() {
        let p = phone();
        assert_eq!(device_power(&p, &AirtimeUsage::default()), p.rho_idle_w);
    }

    #[test]
    fn device_power_worked_example() {
        let p = WirelessDeviceProfile { phy_rate_bps: 1.0, frame_payload_bits: 1.0, ..phone() };
        let u = AirtimeUsage::new(0.1, 0.2, 100.0, 200.0).unwrap();
        assert!((device_power(&p, &u) - 1.29).abs() < 1e-12);
    }

    #[test]
    fn doubling_rx_airtime_adds_rx_term() {
        let p = phone();
        let u = AirtimeUsage::new(0.1, 0.2, 10.0, 20.0).unwrap();
        let u2 = AirtimeUsage { tau_rx: 0.4, ..u };
        let delta = device_power(&p, &u2) - device_power(&p, &u);
        assert!((delta - p.rho_rx_w * 0.2).abs() < 1e-15);
    }

    #[test]
    fn airtime_must_fit_in_unit_interval() {
        assert!(AirtimeUsage::new(0.6, 0.5, 0.0, 0.0).is_err());
        assert!(AirtimeUsage::new(-0.1, 0.5, 0.0, 0.0).is_err());
    }

    #[test]
    fn download_energy_cases() {
        let p = phone();
        assert_eq!(device_download_energy(&p, 0.0, 1e6).unwrap(), (0.0, 0.0));

        let bitrate = 1e6;
        let p = WirelessDeviceProfile {
            rho_idle_w: 0.0,
            rho_tx_w: 0.0,
            rho_rx_w: 1.0,
            gamma_xg_j: 0.0,
            gamma_xr_j: 0.0,
            phy_rate_bps: 2.0 * bitrate,
            frame_payload_bits: 1000.0,
        };
        let (wh, dur) = device_download_energy(&p, 3600.0 * bitrate, bitrate).unwrap();
        assert_eq!(dur, 3600.0);
        assert!((wh - 0.5).abs() < 1e-15);

        assert!(matches!(device_download_energy(&p, 1.0, 3.0 * bitrate), Err(EnergyError::RateExceedsPhy { .. })));
    }

    #[test]
    fn incremental_mode_drops_idle_share() {
        let p = phone();
        let (full, dur) = device_download_energy_with_mode(&p, 3.6e9, 1e6, DeviceEnergyMode::Full).unwrap();
        let (inc, _) = device_download_energy_with_mode(&p, 3.6e9, 1e6, DeviceEnergyMode::Incremental).unwrap();
        assert!((full - inc - p.rho_idle_w * dur / 3600.0).abs() < 1e-12);
    }

    #[test]
    fn decode_cases() {
        assert_eq!(decode_energy(&DecodeModel::default(), 1e9), 0.0);
        assert_eq!(decode_energy(&DecodeModel { alpha_j: 3600.0, beta_j_per_bit: 0.0 }, 123.0), 1.0);
        let wh = decode_energy(&DecodeModel { alpha_j: 0.0, beta_j_per_bit: 1e-6 }, 3.6e9);
        assert!((wh - 1.0).abs() < 1e-12);
    }

    fn equipment() -> impl Strategy<Value = EquipmentProfile> {
        (proptest::collection::vec(0.0f64..1e4, 7), proptest::collection::vec(1.0f64..1e12, 7)).prop_map(|(p, c)| {
            EquipmentProfile {
                es_power_w: p[0],
                es_capacity_bps: c[0],
                g_power_w: p[1],
                g_capacity_bps: c[1],
                pe_power_w: p[2],
                pe_capacity_bps: c[2],
                c_power_w: p[3],
                c_capacity_bps: c[3],
                wdm_power_w: p[4],
                wdm_capacity_bps: c[4],
                sr_power_w: p[5],
                sr_capacity_bps: c[5],
                sd_power_w: p[6],
                sd_capacity_bits: c[6],
            }
        })
    }

    proptest! {
        #[test]
        fn linear_in_size(eq in equipment(), b in 0.0f64..1e12, h in 0u32..20, r in 1u32..100, d in 1.0f64..1e4) {
            let e1 = transport_storage_energy(&TransportContext::new(b, h, r, d, &eq).unwrap()).0;
            let e2 = transport_storage_energy(&TransportContext::new(2.0 * b, h, r, d, &eq).unwrap()).0;
            prop_assert_eq!(e2 - 2.0 * e1, 0.0);
        }

        #[test]
        fn breakdown_sums_to_total(eq in equipment(), b in 0.0f64..1e12, h in 0u32..20, r in 1u32..100, d in 1.0f64..1e4) {
            let (total, br) = transport_storage_energy(&TransportContext::new(b, h, r, d, &eq).unwrap());
            prop_assert_eq!(br.total(), total);
            prop_assert!(br.classes().iter().all(|(_, v)| *v >= 0.0));
        }

        #[test]
        fn strictly_increasing_in_hops(eq in equipment(), b in 1.0f64..1e12, h in 0u32..20) {
            prop_assume!(eq.c_power_w / eq.c_capacity_bps + eq.wdm_power_w / eq.wdm_capacity_bps > 1e-12);
            let at = |hops| transport_storage_energy(&TransportContext::new(b, hops, 1, 1.0, &eq).unwrap()).0;
            prop_assert!(at(h + 1) > at(h));
        }
    }
}
