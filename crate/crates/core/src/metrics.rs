//! End-to-end deadline accounting: the per-packet ledger, windowed miss
//! counters and run summaries.
//!
//! Misses are bucketed into measurement windows by the packet's deadline
//! time, not by when the drop or expiry was observed, so windows stay
//! comparable across managers.

use alloc::string::String;
use alloc::vec::Vec;

use crate::scenario::FlowId;
use crate::time::SimTime;

/// Unique, densely allocated packet identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PacketId(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    /// Delivered end to end at a time <= deadline.
    OnTime,
    /// Deadline passed while the packet was still queued or in flight.
    MissedExpired,
    /// Discarded before its deadline: channel-access failure, retry
    /// exhaustion, queue overflow, node switch-off or run end.
    MissedDropped,
}

/// One terminal ledger entry; every released packet gets exactly one.
#[derive(Debug, Clone, Copy)]
pub struct LedgerRecord {
    pub packet: PacketId,
    pub flow: FlowId,
    pub released: SimTime,
    pub deadline: SimTime,
    pub outcome: Outcome,
    /// End-to-end delivery time; present only for `OnTime`.
    pub delivered: Option<SimTime>,
}

/// Append-only terminal outcome log for a whole run.
#[derive(Debug, Default)]
pub struct Ledger {
    pub records: Vec<LedgerRecord>,
}

/// Windowed DMR measurement for one flow, as consumed by a manager.
#[derive(Debug, Clone, Copy)]
pub struct DmrSample {
    pub flow: FlowId,
    pub window_start: SimTime,
    pub window_end: SimTime,
    pub released: u32,
    pub missed: u32,
    /// missed/released, or the previous sample's value when nothing was
    /// released in the window.
    pub dmr: f64,
}

/// One emitted time-series row: a (window, managed flow) cell.
#[derive(Debug, Clone)]
pub struct WindowRow {
    pub window_end: SimTime,
    pub flow: FlowId,
    pub dmr: f64,
    /// Period in effect during the window, µs.
    pub period_us: u64,
    pub released: u32,
    pub missed: u32,
}

#[derive(Debug, Clone)]
pub struct FlowSummary {
    pub flow: FlowId,
    pub name: String,
    pub managed: bool,
    pub released: u64,
    pub on_time: u64,
    pub missed_expired: u64,
    pub missed_dropped: u64,
    /// Total missed / total released; `None` when nothing was released.
    pub avg_dmr: Option<f64>,
    pub final_period_us: u64,
}

impl FlowSummary {
    pub fn missed(&self) -> u64 {
        self.missed_expired + self.missed_dropped
    }
}

/// Everything a run reports: per-flow totals, the window series for
/// managed flows, and identification of the generating configuration.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub flows: Vec<FlowSummary>,
    pub rows: Vec<WindowRow>,
    pub seed: u64,
    pub config_digest: u64,
}

/// Computes per-flow totals from the raw ledger. `finals` supplies each
/// flow's (name, managed, final period) in flow order.
pub fn summarize(
    ledger: &Ledger,
    finals: &[(String, bool, u64)],
    rows: Vec<WindowRow>,
    seed: u64,
    config_digest: u64,
) -> RunSummary {
    let mut flows: Vec<FlowSummary> = finals
        .iter()
        .enumerate()
        .map(|(i, (name, managed, final_period_us))| FlowSummary {
            flow: FlowId(i),
            name: name.clone(),
            managed: *managed,
            released: 0,
            on_time: 0,
            missed_expired: 0,
            missed_dropped: 0,
            avg_dmr: None,
            final_period_us: *final_period_us,
        })
        .collect();
    for rec in &ledger.records {
        let f = &mut flows[rec.flow.0];
        f.released += 1;
        match rec.outcome {
            Outcome::OnTime => f.on_time += 1,
            Outcome::MissedExpired => f.missed_expired += 1,
            Outcome::MissedDropped => f.missed_dropped += 1,
        }
    }
    for f in &mut flows {
        if f.released > 0 {
            f.avg_dmr = Some(f.missed() as f64 / f.released as f64);
        }
    }
    RunSummary { flows, rows, seed, config_digest }
}
