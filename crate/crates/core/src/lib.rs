//! Discrete-event simulation of content delivery through a hierarchical CDN,
//! with end-to-end energy accounting for every delivery.
//!
//! The crate is organised bottom-up:
//!
//! * [`scenario`] owns every input type and the JSON scenario loader.
//! * [`energy`] holds the transport/storage, wireless device and decoding
//!   energy models together with the [`energy::EnergyLedger`].
//! * [`workload`] generates the catalog, popularity dynamics and the
//!   per-cluster request streams.
//! * [`engine`] is the event loop: routing, caching, replication and charging.
//! * [`report`] turns a finished run into the summary JSON and CSV files.
//! * [`cli`] (feature `cli`) wires the above into `validate`, `simulate` and
//!   `sweep` commands.

pub mod energy;
pub mod engine;
pub mod report;
pub mod scenario;
pub mod workload;

#[cfg(feature = "cli")]
pub mod cli;

pub use energy::{EnergyClass, EnergyLedger};
pub use engine::run;
pub use report::SimulationReport;
pub use scenario::{load_scenario, Scenario, ScenarioError};
