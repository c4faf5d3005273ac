//! Virtual clock and priority event queue.
//!
//! Events are totally ordered by `(time, seq)` where `seq` is the global
//! issue order, so ties pop in the order they were scheduled regardless
//! of heap internals.

use alloc::collections::BinaryHeap;
use core::cmp::Reverse;
use core::fmt;

use crate::metrics::PacketId;
use crate::scenario::{FlowId, NodeId};
use crate::time::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// A flow samples a new packet at its source.
    PacketRelease { flow: FlowId },
    /// A node's CSMA backoff (plus CCA dwell) has elapsed; `token`
    /// invalidates expiries belonging to cancelled attempts.
    MacBackoffExpired { node: NodeId, token: u64 },
    /// A node's data frame leaves the air.
    TxEnd { node: NodeId },
    /// End of a transmitter's acknowledgment wait window.
    AckTimeout { node: NodeId },
    /// Periodic QoS manager invocation for one flow.
    ControllerTick { flow: FlowId },
    NodeOn { node: NodeId },
    NodeOff { node: NodeId },
    /// Fires one microsecond after the packet's absolute deadline, so a
    /// delivery landing exactly on the deadline still counts as on time.
    DeadlineExpiry { packet: PacketId },
    SimEnd,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EventKind::PacketRelease { flow } => write!(f, "PacketRelease flow={}", flow.0),
            EventKind::MacBackoffExpired { node, token } => {
                write!(f, "MacBackoffExpired node={} token={}", node.0, token)
            }
            EventKind::TxEnd { node } => write!(f, "TxEnd node={}", node.0),
            EventKind::AckTimeout { node } => write!(f, "AckTimeout node={}", node.0),
            EventKind::ControllerTick { flow } => write!(f, "ControllerTick flow={}", flow.0),
            EventKind::NodeOn { node } => write!(f, "NodeOn node={}", node.0),
            EventKind::NodeOff { node } => write!(f, "NodeOff node={}", node.0),
            EventKind::DeadlineExpiry { packet } => write!(f, "DeadlineExpiry packet={}", packet.0),
            EventKind::SimEnd => write!(f, "SimEnd"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Event {
    pub at: SimTime,
    pub seq: u64,
    pub kind: EventKind,
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        (self.at, self.seq).cmp(&(other.at, other.seq))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Reverse<Event>>,
    clock: SimTime,
    next_seq: u64,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn now(&self) -> SimTime {
        self.clock
    }

    /// Enqueues `kind` at `at`, assigning the next issue sequence number.
    ///
    /// Scheduling before the current clock is a logic error and aborts
    /// the run with a diagnostic.
    pub fn schedule(&mut self, at: SimTime, kind: EventKind) {
        assert!(
            at >= self.clock,
            "event scheduled in the past: at={} clock={} kind={}",
            at,
            self.clock,
            kind
        );
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Reverse(Event { at, seq, kind }));
    }

    /// Pops the minimal `(at, seq)` event and advances the clock to it.
    /// Returns `None` when the queue is exhausted.
    pub fn advance(&mut self) -> Option<Event> {
        let Reverse(ev) = self.heap.pop()?;
        debug_assert!(ev.at >= self.clock);
        self.clock = ev.at;
        Some(ev)
    }
}
