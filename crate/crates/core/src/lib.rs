//! Deterministic discrete-event simulation of a small wireless
//! sensor/actuator network: a single-collision-domain CSMA/CA channel,
//! periodic deadline-constrained flows over static routes, and pluggable
//! per-flow QoS managers that adapt sampling periods from measured
//! deadline miss ratios.
//!
//! The crate is `no_std` + `alloc`: it performs no IO and owns no global
//! state. A whole run is a value (`sim::run_scenario`) that two callers
//! with the same [`scenario::Scenario`] reproduce byte for byte.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod control;
pub mod event;
pub mod fuzzy;
pub mod mac;
pub mod metrics;
pub mod rng;
pub mod scenario;
pub mod sim;
pub mod time;

pub use event::{Event, EventKind, EventQueue};
pub use rng::{derive_seed, DetRng};
pub use scenario::{FlowId, ManagerKind, NodeId, Role, Scenario};
pub use sim::{run_scenario, RunOptions, RunOutput};
pub use time::SimTime;
