//! Single-collision-domain wireless channel with unslotted CSMA/CA.
//!
//! Every node is in range of every other, there is no capture effect and
//! no propagation delay: two transmissions whose airtimes overlap by one
//! microsecond or more both fail. Clear channel assessment looks back
//! over the CCA dwell that closes each backoff wait, so two nodes whose
//! waits expire at the same instant both see an idle channel and
//! collide.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use crate::scenario::NodeId;
use crate::time::SimTime;

/// Contention and framing constants. Defaults are the IEEE 802.15.4
/// 2.4 GHz unslotted CSMA/CA values at 250 kbps.
#[derive(Debug, Clone, PartialEq)]
pub struct MacParams {
    pub data_rate_bps: u64,
    /// Radio symbol duration, µs.
    pub symbol_us: u64,
    /// Symbols per unit backoff period.
    pub unit_backoff_symbols: u64,
    /// Initial backoff exponent.
    pub min_be: u8,
    /// Backoff exponent ceiling.
    pub max_be: u8,
    /// CCA failures tolerated before the attempt is abandoned.
    pub max_csma_backoffs: u8,
    /// CCA dwell, symbols.
    pub cca_symbols: u64,
    pub ack_enabled: bool,
    /// Retransmissions after a failed exchange.
    pub max_retries: u8,
    pub ack_bytes: u32,
    /// Gap separating a frame from its ack, and a node's consecutive
    /// frames, µs.
    pub ifs_us: u64,
    /// Per-node FIFO transmit queue depth; arrival to a full queue drops
    /// the oldest waiting packet.
    pub queue_capacity: usize,
}

impl Default for MacParams {
    fn default() -> Self {
        MacParams {
            data_rate_bps: 250_000,
            symbol_us: 16,
            unit_backoff_symbols: 20,
            min_be: 3,
            max_be: 5,
            max_csma_backoffs: 4,
            cca_symbols: 8,
            ack_enabled: true,
            max_retries: 3,
            ack_bytes: 11,
            ifs_us: 192,
            queue_capacity: 20,
        }
    }
}

impl MacParams {
    /// Airtime of a `bytes`-long frame: ceil(bytes * 8 / rate) in µs.
    pub fn frame_airtime_us(&self, bytes: u32) -> u64 {
        assert!(bytes > 0, "zero-length frame");
        let bits = bytes as u64 * 8;
        (bits * 1_000_000).div_ceil(self.data_rate_bps)
    }

    pub fn ack_airtime_us(&self) -> u64 {
        self.frame_airtime_us(self.ack_bytes)
    }

    pub fn cca_us(&self) -> u64 {
        self.cca_symbols * self.symbol_us
    }

    /// Random backoff delay for exponent `be`:
    /// `rand(0, 2^be - 1)` unit backoff periods.
    pub fn backoff_delay_us(&self, rng: &mut crate::rng::DetRng, be: u8) -> u64 {
        let slots = (1u64 << be) - 1;
        rng.rand_int(0, slots) * self.unit_backoff_symbols * self.symbol_us
    }
}

/// Which leg of an exchange a channel span carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Leg {
    Frame,
    Ack,
}

/// One occupancy interval `[start, end)` of the shared channel. The
/// beneficiary is the node whose exchange fails if this span collides:
/// for acks that is the data frame's sender, not the ack transmitter.
#[derive(Debug, Clone, Copy)]
struct Span {
    start: SimTime,
    end: SimTime,
    beneficiary: NodeId,
    leg: Leg,
    collided: bool,
}

/// Spans ending this far before the clock can no longer intersect any
/// CCA lookback and are pruned.
const SPAN_RETAIN_US: u64 = 10_000;

/// Shared-channel state: the set of recent and in-flight occupancy
/// spans, kept long enough to answer lookback CCA queries.
#[derive(Debug, Default)]
pub struct Channel {
    spans: VecDeque<Span>,
}

impl Channel {
    pub fn new() -> Self {
        Self::default()
    }

    /// True if any occupancy intersects `[from, to)`.
    pub fn busy_during(&self, from: SimTime, to: SimTime) -> bool {
        self.spans.iter().any(|s| s.start < to && from < s.end)
    }

    /// Registers a new occupancy and marks every span it overlaps
    /// (including itself) as collided. Returns the beneficiaries whose
    /// legs were newly collided by this join, excluding the new span's
    /// own beneficiary/leg pair.
    pub fn join(
        &mut self,
        start: SimTime,
        end: SimTime,
        beneficiary: NodeId,
        leg: Leg,
    ) -> JoinOutcome {
        self.prune(start);
        let mut hit = Vec::new();
        let mut collided = false;
        for s in self.spans.iter_mut() {
            if s.start < end && start < s.end {
                collided = true;
                if !s.collided {
                    s.collided = true;
                    hit.push((s.beneficiary, s.leg));
                }
            }
        }
        self.spans.push_back(Span { start, end, beneficiary, leg, collided });
        JoinOutcome { collided, newly_collided: hit }
    }

    fn prune(&mut self, now: SimTime) {
        while let Some(front) = self.spans.front() {
            if front.end + SPAN_RETAIN_US < now {
                self.spans.pop_front();
            } else {
                break;
            }
        }
    }
}

#[derive(Debug)]
pub struct JoinOutcome {
    /// The joining span itself overlapped something.
    pub collided: bool,
    /// Spans flipped to collided by this join.
    pub newly_collided: Vec<(NodeId, Leg)>,
}
