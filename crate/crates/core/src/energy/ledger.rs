use std::fmt;

use super::{EnergyError, TransportBreakdown};

/// Ledger bucket for a share of the end-to-end energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EnergyClass {
    Switching,
    Gateway,
    ProviderEdge,
    Core,
    Wdm,
    Server,
    Storage,
    WirelessDevice,
    Decoding,
}

impl EnergyClass {
    pub const ALL: [EnergyClass; 9] = [
        EnergyClass::Switching,
        EnergyClass::Gateway,
        EnergyClass::ProviderEdge,
        EnergyClass::Core,
        EnergyClass::Wdm,
        EnergyClass::Server,
        EnergyClass::Storage,
        EnergyClass::WirelessDevice,
        EnergyClass::Decoding,
    ];

    /// Column / key stem used in reports.
    pub fn name(self) -> &'static str {
        match self {
            EnergyClass::Switching => "switching",
            EnergyClass::Gateway => "gateway",
            EnergyClass::ProviderEdge => "provider_edge",
            EnergyClass::Core => "core",
            EnergyClass::Wdm => "wdm",
            EnergyClass::Server => "server",
            EnergyClass::Storage => "storage",
            EnergyClass::WirelessDevice => "wireless_device",
            EnergyClass::Decoding => "decoding",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for EnergyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Accumulated watt-hours per [`EnergyClass`] with a running total.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnergyLedger {
    classes: [f64; 9],
    total_wh: f64,
    request_count: u64,
}

impl EnergyLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, class: EnergyClass, wh: f64) -> Result<(), EnergyError> {
        if !(wh.is_finite() && wh >= 0.0) {
            return Err(EnergyError::NegativeEnergy { class, wh });
        }
        self.classes[class.index()] += wh;
        self.total_wh += wh;
        Ok(())
    }

    pub fn add_transport(&mut self, b: &TransportBreakdown) -> Result<(), EnergyError> {
        for (class, wh) in b.classes() {
            self.add(class, wh)?;
        }
        Ok(())
    }

    pub fn record_request(&mut self) {
        self.request_count += 1;
    }

    pub fn get(&self, class: EnergyClass) -> f64 {
        self.classes[class.index()]
    }

    pub fn total_wh(&self) -> f64 {
        self.total_wh
    }

    pub fn request_count(&self) -> u64 {
        self.request_count
    }

    /// Sum of the class fields, recomputed.
    pub fn class_sum(&self) -> f64 {
        self.classes.iter().sum()
    }

    /// Watt-hours on the network and data-centre side (everything except the
    /// wireless device and decoding classes).
    pub fn transport_wh(&self) -> f64 {
        EnergyClass::ALL[..7].iter().map(|c| self.get(*c)).sum()
    }

    pub fn is_conserved(&self, rel_tol: f64) -> bool {
        rel_close(self.total_wh, self.class_sum(), rel_tol)
    }

    pub fn merge(&self, other: &EnergyLedger) -> EnergyLedger {
        let mut out = self.clone();
        out.merge_from(other);
        out
    }

    pub fn merge_from(&mut self, other: &EnergyLedger) {
        for (a, b) in self.classes.iter_mut().zip(other.classes) {
            *a += b;
        }
        self.total_wh += other.total_wh;
        self.request_count += other.request_count;
    }

    /// Field-wise comparison at a relative tolerance; request counts must match.
    pub fn approx_eq(&self, other: &EnergyLedger, rel_tol: f64) -> bool {
        self.request_count == other.request_count
            && rel_close(self.total_wh, other.total_wh, rel_tol)
            && self.classes.iter().zip(other.classes).all(|(a, b)| rel_close(*a, b, rel_tol))
    }
}

pub(crate) fn rel_close(a: f64, b: f64, rel_tol: f64) -> bool {
    let scale = a.abs().max(b.abs());
    scale == 0.0 || (a - b).abs() <= rel_tol * scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn adding_zero_leaves_ledger_empty() {
        let mut l = EnergyLedger::new();
        l.add(EnergyClass::Core, 0.0).unwrap();
        assert_eq!(l, EnergyLedger::new());
    }

    #[test]
    fn empty_is_merge_identity() {
        let mut a = EnergyLedger::new();
        a.add(EnergyClass::Wdm, 1.5).unwrap();
        a.record_request();
        assert_eq!(a.merge(&EnergyLedger::new()), a);
    }

    #[test]
    fn negative_and_nan_are_rejected() {
        let mut l = EnergyLedger::new();
        assert!(l.add(EnergyClass::Server, -1e-9).is_err());
        assert!(l.add(EnergyClass::Server, f64::NAN).is_err());
        assert_eq!(l.total_wh(), 0.0);
    }

    fn filled(entries: &[(usize, f64)], requests: u64) -> EnergyLedger {
        let mut l = EnergyLedger::new();
        for &(c, wh) in entries {
            l.add(EnergyClass::ALL[c % 9], wh).unwrap();
        }
        for _ in 0..requests {
            l.record_request();
        }
        l
    }

    fn entries() -> impl Strategy<Value = Vec<(usize, f64)>> {
        proptest::collection::vec((0usize..9, 0.0f64..1e6), 0..50)
    }

    proptest! {
        #[test]
        fn merge_is_fieldwise_sum(a in entries(), b in entries(), ra in 0u64..5, rb in 0u64..5) {
            let (la, lb) = (filled(&a, ra), filled(&b, rb));
            let m = la.merge(&lb);
            for c in EnergyClass::ALL {
                prop_assert_eq!(m.get(c), la.get(c) + lb.get(c));
            }
            prop_assert_eq!(m.request_count(), ra + rb);
        }

        #[test]
        fn merge_commutes_and_associates(a in entries(), b in entries(), c in entries()) {
            let (la, lb, lc) = (filled(&a, 1), filled(&b, 2), filled(&c, 3));
            prop_assert!(la.merge(&lb).approx_eq(&lb.merge(&la), 1e-9));
            prop_assert!(la.merge(&lb).merge(&lc).approx_eq(&la.merge(&lb.merge(&lc)), 1e-9));
        }

        #[test]
        fn total_tracks_class_sum(a in entries()) {
            let l = filled(&a, 0);
            prop_assert!(l.is_conserved(1e-9));
        }
    }
}
