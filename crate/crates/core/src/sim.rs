//! The run loop: owns all per-run state, dispatches events and produces
//! the ledger, window series and summary.
//!
//! A run is single-threaded and self-contained; two runs of the same
//! scenario produce identical event sequences, draws and outputs.

use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use crate::control::FuzzyState;
use crate::event::{EventKind, EventQueue};
use crate::mac::{Channel, Leg};
use crate::metrics::{
    summarize, DmrSample, Ledger, LedgerRecord, Outcome, PacketId, RunSummary, WindowRow,
};
use crate::rng::DetRng;
use crate::scenario::{FlowId, ManagerKind, NodeId, ResolvedFlow, Scenario, ScenarioError};
use crate::time::SimTime;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Collect one log line per processed event.
    pub trace: bool,
}

/// A period change applied by a manager: (flow, when, new period µs).
pub type PeriodChange = (FlowId, SimTime, u64);

#[derive(Debug)]
pub struct RunOutput {
    pub summary: RunSummary,
    pub ledger: Ledger,
    /// Every period adjustment over the run; empty under the null
    /// manager and always empty for unmanaged flows.
    pub period_changes: Vec<PeriodChange>,
    pub trace: Option<Vec<String>>,
}

/// Executes one scenario to completion.
pub fn run_scenario(sc: &Scenario, opts: &RunOptions) -> Result<RunOutput, ScenarioError> {
    let routes = sc.resolve()?;
    let mut run = Run::new(sc, routes, opts.trace);
    run.prime();
    run.run_loop();
    Ok(run.finish())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Loc {
    /// Held in this node's transmit queue (possibly in service).
    Queued(NodeId),
    /// No longer held anywhere.
    Gone,
}

struct PacketRt {
    flow: FlowId,
    deadline: SimTime,
    released: SimTime,
    /// Index of the current holder within the flow's route.
    hop: usize,
    loc: Loc,
    recorded: bool,
}

#[derive(Debug, Clone, Copy)]
enum Phase {
    Backoff { expires: SimTime },
    Tx,
    AwaitAck,
}

struct Attempt {
    packet: PacketId,
    be: u8,
    nb: u8,
    retries: u8,
    token: u64,
    phase: Phase,
    frame_collided: bool,
    ack_collided: bool,
}

struct NodeRt {
    active: bool,
    queue: VecDeque<PacketId>,
    attempt: Option<Attempt>,
    next_token: u64,
}

#[derive(Default, Clone, Copy)]
struct WinCell {
    released: u32,
    on_time: u32,
}

struct FlowRt {
    route: Vec<NodeId>,
    period_us: u64,
    next_release_at: Option<SimTime>,
    fuzzy: FuzzyState,
    last_dmr: f64,
    /// Per-window release/on-time counters, indexed by deadline bucket.
    win: Vec<WinCell>,
}

struct Run<'a> {
    sc: &'a Scenario,
    events: EventQueue,
    rng: DetRng,
    channel: Channel,
    nodes: Vec<NodeRt>,
    flows: Vec<FlowRt>,
    packets: Vec<PacketRt>,
    ledger: Ledger,
    rows: Vec<WindowRow>,
    period_changes: Vec<PeriodChange>,
    /// Window index of the last live controller tick.
    last_live_window: u64,
    trace: Option<Vec<String>>,
}

impl<'a> Run<'a> {
    fn new(sc: &'a Scenario, routes: Vec<ResolvedFlow>, trace: bool) -> Self {
        let mut is_source = alloc::vec![false; sc.nodes.len()];
        for r in &routes {
            is_source[r.source.0] = true;
        }
        let nodes = is_source
            .iter()
            .map(|&src| NodeRt {
                active: !src,
                queue: VecDeque::new(),
                attempt: None,
                next_token: 0,
            })
            .collect();
        let flows = sc
            .flows
            .iter()
            .zip(routes)
            .map(|(spec, resolved)| FlowRt {
                route: resolved.route,
                period_us: spec.period_us,
                next_release_at: None,
                fuzzy: FuzzyState::default(),
                last_dmr: 0.0,
                win: Vec::new(),
            })
            .collect();
        Run {
            sc,
            events: EventQueue::new(),
            rng: DetRng::new(sc.seed),
            channel: Channel::new(),
            nodes,
            flows,
            packets: Vec::new(),
            ledger: Ledger::default(),
            rows: Vec::new(),
            period_changes: Vec::new(),
            last_live_window: 0,
            trace: trace.then(Vec::new),
        }
    }

    /// Schedules the run-end marker, the on/off schedule and the
    /// controller tick chains.
    fn prime(&mut self) {
        self.events.schedule(self.sc.duration, EventKind::SimEnd);
        for (i, spec) in self.sc.flows.iter().enumerate() {
            let source = self.flows[i].route[0];
            for act in &spec.activation {
                self.events.schedule(act.on, EventKind::NodeOn { node: source });
                if let Some(off) = act.off {
                    self.events.schedule(off, EventKind::NodeOff { node: source });
                }
            }
        }
        let interval = self.sc.controller.interval_us;
        for (i, spec) in self.sc.flows.iter().enumerate() {
            if spec.managed {
                self.events.schedule(
                    SimTime::from_micros(interval),
                    EventKind::ControllerTick { flow: FlowId(i) },
                );
            }
        }
    }

    fn run_loop(&mut self) {
        while let Some(ev) = self.events.advance() {
            if let Some(log) = self.trace.as_mut() {
                let mut line = String::new();
                let _ = write!(line, "{} {} {}", ev.at, ev.seq, ev.kind);
                log.push(line);
            }
            match ev.kind {
                EventKind::PacketRelease { flow } => self.on_release(flow),
                EventKind::MacBackoffExpired { node, token } => self.on_backoff(node, token),
                EventKind::TxEnd { node } => self.on_tx_end(node),
                EventKind::AckTimeout { node } => self.on_ack_timeout(node),
                EventKind::ControllerTick { flow } => self.on_tick(flow),
                EventKind::NodeOn { node } => self.on_node_on(node),
                EventKind::NodeOff { node } => self.on_node_off(node),
                EventKind::DeadlineExpiry { packet } => self.on_expiry(packet),
                EventKind::SimEnd => {
                    self.on_sim_end();
                    break;
                }
            }
        }
    }

    fn now(&self) -> SimTime {
        self.events.now()
    }

    // ------------------------------------------------------------------
    // traffic generation

    fn on_release(&mut self, f: FlowId) {
        let now = self.now();
        if self.flows[f.0].next_release_at != Some(now) {
            return; // superseded by a NodeOff
        }
        let period = self.flows[f.0].period_us;
        let deadline = now + period;
        let id = PacketId(self.packets.len() as u64);
        let source = self.flows[f.0].route[0];
        debug_assert!(self.nodes[source.0].active);
        self.packets.push(PacketRt {
            flow: f,
            deadline,
            released: now,
            hop: 0,
            loc: Loc::Gone,
            recorded: false,
        });
        let bucket = self.bucket_of(deadline);
        self.win_cell(f, bucket).released += 1;
        self.events.schedule(deadline + 1, EventKind::DeadlineExpiry { packet: id });
        let next = now + period;
        self.flows[f.0].next_release_at = Some(next);
        self.events.schedule(next, EventKind::PacketRelease { flow: f });
        self.enqueue(source, id);
    }

    fn bucket_of(&self, deadline: SimTime) -> usize {
        (deadline.micros() / self.sc.controller.interval_us) as usize
    }

    fn win_cell(&mut self, f: FlowId, bucket: usize) -> &mut WinCell {
        let win = &mut self.flows[f.0].win;
        if bucket >= win.len() {
            win.resize(bucket + 1, WinCell::default());
        }
        &mut win[bucket]
    }

    /// Admits a packet to a node's FIFO transmit queue, applying the
    /// drop-oldest overflow policy, and kicks off contention if the node
    /// is idle.
    fn enqueue(&mut self, n: NodeId, pkt: PacketId) {
        if !self.nodes[n.0].active {
            // delivery into a switched-off hop
            self.record(pkt, Outcome::MissedDropped, None);
            return;
        }
        if self.nodes[n.0].queue.len() >= self.sc.mac.queue_capacity {
            let in_service = self.nodes[n.0].attempt.is_some();
            let victim_idx = usize::from(in_service);
            if let Some(&victim) = self.nodes[n.0].queue.get(victim_idx) {
                self.nodes[n.0].queue.remove(victim_idx);
                self.packets[victim.0 as usize].loc = Loc::Gone;
                if !self.packets[victim.0 as usize].recorded {
                    self.record(victim, Outcome::MissedDropped, None);
                }
            } else {
                // queue of one, occupied by the frame in service
                self.record(pkt, Outcome::MissedDropped, None);
                return;
            }
        }
        self.nodes[n.0].queue.push_back(pkt);
        self.packets[pkt.0 as usize].loc = Loc::Queued(n);
        if self.nodes[n.0].attempt.is_none() {
            self.start_csma(n, 0, 0);
        }
    }

    // ------------------------------------------------------------------
    // CSMA/CA

    /// Begins a contention attempt for the head of `n`'s queue:
    /// `extra_us` (inter-frame space) + random backoff + CCA dwell.
    fn start_csma(&mut self, n: NodeId, retries: u8, extra_us: u64) {
        debug_assert!(self.nodes[n.0].attempt.is_none());
        debug_assert!(self.nodes[n.0].active);
        let pkt = *self.nodes[n.0].queue.front().expect("csma without a queued packet");
        let be = self.sc.mac.min_be;
        let delay = self.sc.mac.backoff_delay_us(&mut self.rng, be);
        let expires = self.now() + extra_us + delay + self.sc.mac.cca_us();
        let token = self.nodes[n.0].next_token;
        self.nodes[n.0].next_token += 1;
        self.nodes[n.0].attempt = Some(Attempt {
            packet: pkt,
            be,
            nb: 0,
            retries,
            token,
            phase: Phase::Backoff { expires },
            frame_collided: false,
            ack_collided: false,
        });
        self.events.schedule(expires, EventKind::MacBackoffExpired { node: n, token });
    }

    fn on_backoff(&mut self, n: NodeId, token: u64) {
        let now = self.now();
        match &self.nodes[n.0].attempt {
            Some(a) if a.token == token => match a.phase {
                Phase::Backoff { expires } if expires == now => {}
                _ => return,
            },
            _ => return, // attempt was cancelled or replaced
        }
        // CCA over the dwell that just elapsed
        let cca = self.sc.mac.cca_us();
        let busy = self.channel.busy_during(now.saturating_sub(cca), now);
        if !busy {
            let pkt = self.nodes[n.0].attempt.as_ref().unwrap().packet;
            let flow = self.packets[pkt.0 as usize].flow;
            let air = self.sc.mac.frame_airtime_us(self.sc.flows[flow.0].frame_bytes);
            let end = now + air;
            let join = self.channel.join(now, end, n, Leg::Frame);
            {
                let a = self.nodes[n.0].attempt.as_mut().unwrap();
                a.phase = Phase::Tx;
                a.frame_collided = join.collided;
            }
            self.apply_collision_marks(join.newly_collided);
            self.events.schedule(end, EventKind::TxEnd { node: n });
        } else {
            let a = self.nodes[n.0].attempt.as_mut().unwrap();
            a.nb += 1;
            a.be = (a.be + 1).min(self.sc.mac.max_be);
            if a.nb > self.sc.mac.max_csma_backoffs {
                // channel-access failure
                let pkt = a.packet;
                self.nodes[n.0].attempt = None;
                self.remove_from_queue(n, pkt);
                if !self.packets[pkt.0 as usize].recorded {
                    self.record(pkt, Outcome::MissedDropped, None);
                }
                // no frame went out, so no inter-frame space
                if self.nodes[n.0].active && !self.nodes[n.0].queue.is_empty() {
                    self.start_csma(n, 0, 0);
                }
            } else {
                let be = a.be;
                let delay = self.sc.mac.backoff_delay_us(&mut self.rng, be);
                let expires = now + delay + cca;
                let a = self.nodes[n.0].attempt.as_mut().unwrap();
                a.phase = Phase::Backoff { expires };
                self.events.schedule(expires, EventKind::MacBackoffExpired { node: n, token });
            }
        }
    }

    fn apply_collision_marks(&mut self, marks: Vec<(NodeId, Leg)>) {
        for (n, leg) in marks {
            match (self.nodes[n.0].attempt.as_mut(), leg) {
                (Some(a), Leg::Frame) => a.frame_collided = true,
                (Some(a), Leg::Ack) => a.ack_collided = true,
                (None, _) => debug_assert!(false, "collision mark for idle node"),
            }
        }
    }

    fn on_tx_end(&mut self, n: NodeId) {
        let now = self.now();
        let collided = {
            let a = self.nodes[n.0].attempt.as_ref().expect("TxEnd without attempt");
            debug_assert!(matches!(a.phase, Phase::Tx));
            a.frame_collided
        };
        if self.sc.mac.ack_enabled {
            let ack_start = now + self.sc.mac.ifs_us;
            let ack_end = ack_start + self.sc.mac.ack_airtime_us();
            if !collided {
                // the receiver acks; a lost ack fails the sender's exchange
                let join = self.channel.join(ack_start, ack_end, n, Leg::Ack);
                {
                    let a = self.nodes[n.0].attempt.as_mut().unwrap();
                    a.ack_collided = join.collided;
                }
                self.apply_collision_marks(join.newly_collided);
            }
            let a = self.nodes[n.0].attempt.as_mut().unwrap();
            a.phase = Phase::AwaitAck;
            self.events.schedule(ack_end, EventKind::AckTimeout { node: n });
        } else {
            self.conclude_exchange(n, !collided);
        }
    }

    fn on_ack_timeout(&mut self, n: NodeId) {
        let a = self.nodes[n.0].attempt.as_ref().expect("AckTimeout without attempt");
        debug_assert!(matches!(a.phase, Phase::AwaitAck));
        let success = !a.frame_collided && !a.ack_collided;
        self.conclude_exchange(n, success);
    }

    /// Settles a finished exchange: deliver or retry or drop, then move
    /// on to the next queued packet after the inter-frame space.
    fn conclude_exchange(&mut self, n: NodeId, success: bool) {
        let now = self.now();
        let ifs = self.sc.mac.ifs_us;
        let a = self.nodes[n.0].attempt.take().expect("conclude without attempt");
        let pkt = a.packet;
        debug_assert_eq!(self.nodes[n.0].queue.front(), Some(&pkt));
        let recorded = self.packets[pkt.0 as usize].recorded;
        if success {
            self.nodes[n.0].queue.pop_front();
            self.packets[pkt.0 as usize].loc = Loc::Gone;
            if !recorded {
                let flow = self.packets[pkt.0 as usize].flow;
                let hop = self.packets[pkt.0 as usize].hop + 1;
                self.packets[pkt.0 as usize].hop = hop;
                let holder = self.flows[flow.0].route[hop];
                if hop == self.flows[flow.0].route.len() - 1 {
                    // end-to-end delivery
                    debug_assert!(now <= self.packets[pkt.0 as usize].deadline);
                    self.record(pkt, Outcome::OnTime, Some(now));
                } else {
                    self.enqueue(holder, pkt);
                }
            }
            // expired mid-flight: already accounted, vanish silently
        } else if !recorded && self.nodes[n.0].active && a.retries < self.sc.mac.max_retries {
            // retransmission: CSMA restarts from scratch for the same packet
            self.start_csma(n, a.retries + 1, ifs);
            return;
        } else {
            self.nodes[n.0].queue.pop_front();
            self.packets[pkt.0 as usize].loc = Loc::Gone;
            if !recorded {
                self.record(pkt, Outcome::MissedDropped, None);
            }
        }
        if self.nodes[n.0].active && !self.nodes[n.0].queue.is_empty() {
            self.start_csma(n, 0, ifs);
        }
    }

    // ------------------------------------------------------------------
    // schedule and deadlines

    fn on_node_on(&mut self, n: NodeId) {
        let now = self.now();
        self.nodes[n.0].active = true;
        for (i, _) in self.sc.flows.iter().enumerate() {
            if self.flows[i].route[0] == n {
                self.flows[i].next_release_at = Some(now);
                self.events.schedule(now, EventKind::PacketRelease { flow: FlowId(i) });
            }
        }
    }

    fn on_node_off(&mut self, n: NodeId) {
        self.nodes[n.0].active = false;
        // a backoff attempt is cancelled outright; a frame already on the
        // air completes and is settled by its TxEnd/AckTimeout
        let keep = match &self.nodes[n.0].attempt {
            Some(a) if matches!(a.phase, Phase::Backoff { .. }) => {
                self.nodes[n.0].attempt = None;
                None
            }
            Some(a) => Some(a.packet),
            None => None,
        };
        let mut flushed = Vec::new();
        self.nodes[n.0].queue.retain(|&p| {
            if Some(p) == keep {
                true
            } else {
                flushed.push(p);
                false
            }
        });
        for p in flushed {
            self.packets[p.0 as usize].loc = Loc::Gone;
            if !self.packets[p.0 as usize].recorded {
                self.record(p, Outcome::MissedDropped, None);
            }
        }
        for (i, _) in self.sc.flows.iter().enumerate() {
            if self.flows[i].route[0] == n {
                self.flows[i].next_release_at = None;
            }
        }
    }

    fn on_expiry(&mut self, pkt: PacketId) {
        if self.packets[pkt.0 as usize].recorded {
            return; // settled before its deadline passed
        }
        self.record(pkt, Outcome::MissedExpired, None);
        let Loc::Queued(n) = self.packets[pkt.0 as usize].loc else {
            debug_assert!(false, "unrecorded packet with no location");
            return;
        };
        let is_attempt_pkt =
            self.nodes[n.0].attempt.as_ref().map(|a| a.packet) == Some(pkt);
        if is_attempt_pkt {
            match self.nodes[n.0].attempt.as_ref().unwrap().phase {
                Phase::Backoff { .. } => {
                    // purge a dead head instead of transmitting it
                    self.nodes[n.0].attempt = None;
                    self.remove_from_queue(n, pkt);
                    if self.nodes[n.0].active && !self.nodes[n.0].queue.is_empty() {
                        self.start_csma(n, 0, 0);
                    }
                }
                // already on the air: let the exchange finish
                Phase::Tx | Phase::AwaitAck => {}
            }
        } else {
            self.remove_from_queue(n, pkt);
        }
    }

    fn remove_from_queue(&mut self, n: NodeId, pkt: PacketId) {
        self.nodes[n.0].queue.retain(|&p| p != pkt);
        self.packets[pkt.0 as usize].loc = Loc::Gone;
    }

    fn record(&mut self, pkt: PacketId, outcome: Outcome, delivered: Option<SimTime>) {
        let p = &mut self.packets[pkt.0 as usize];
        assert!(!p.recorded, "second terminal outcome for packet {}", pkt.0);
        p.recorded = true;
        let (flow, released, deadline) = (p.flow, p.released, p.deadline);
        self.ledger.records.push(LedgerRecord {
            packet: pkt,
            flow,
            released,
            deadline,
            outcome,
            delivered,
        });
        if outcome == Outcome::OnTime {
            let bucket = self.bucket_of(deadline);
            self.win_cell(flow, bucket).on_time += 1;
        }
    }

    // ------------------------------------------------------------------
    // QoS management

    fn measure(&mut self, f: FlowId, window_index: u64) -> DmrSample {
        let interval = self.sc.controller.interval_us;
        let cell = self
            .flows[f.0]
            .win
            .get(window_index as usize)
            .copied()
            .unwrap_or_default();
        let missed = cell.released - cell.on_time;
        let dmr = if cell.released > 0 {
            missed as f64 / cell.released as f64
        } else {
            self.flows[f.0].last_dmr
        };
        self.flows[f.0].last_dmr = dmr;
        DmrSample {
            flow: f,
            window_start: SimTime::from_micros(window_index * interval),
            window_end: SimTime::from_micros((window_index + 1) * interval),
            released: cell.released,
            missed,
            dmr,
        }
    }

    fn on_tick(&mut self, f: FlowId) {
        let now = self.now();
        let interval = self.sc.controller.interval_us;
        let k = now.micros() / interval;
        let sample = self.measure(f, k - 1);
        self.last_live_window = k;
        self.rows.push(WindowRow {
            window_end: now,
            flow: f,
            dmr: sample.dmr,
            period_us: self.flows[f.0].period_us,
            released: sample.released,
            missed: sample.missed,
        });
        let spec = &self.sc.flows[f.0];
        let source_active = self.nodes[self.flows[f.0].route[0].0].active;
        if self.sc.manager == ManagerKind::Fuzzy && spec.managed && source_active {
            let flow = &mut self.flows[f.0];
            let next = flow.fuzzy.tick(
                &self.sc.controller,
                sample.dmr,
                flow.period_us,
                spec.period_min_us,
                spec.period_max_us,
            );
            if next != flow.period_us {
                flow.period_us = next;
                self.period_changes.push((f, now, next));
            }
        }
        self.events.schedule(now + interval, EventKind::ControllerTick { flow: f });
    }

    // ------------------------------------------------------------------
    // run end

    /// Settles every still-pending packet (queued or in flight at the
    /// cut) so released = on_time + missed_expired + missed_dropped
    /// holds exactly at SimEnd.
    fn on_sim_end(&mut self) {
        for id in 0..self.packets.len() {
            if !self.packets[id].recorded {
                self.record(PacketId(id as u64), Outcome::MissedDropped, None);
            }
        }
    }

    /// Emits the trailing window rows no live tick covered (the cut
    /// window plus deadline spill-over past the horizon), then builds
    /// the summary.
    fn finish(mut self) -> RunOutput {
        let interval = self.sc.controller.interval_us;
        let spill = self
            .sc
            .flows
            .iter()
            .filter(|f| f.managed)
            .map(|f| f.period_max_us)
            .max()
            .unwrap_or(0);
        let horizon_us = self.sc.duration.micros() + spill;
        let last_window = horizon_us.div_ceil(interval);
        for k in (self.last_live_window + 1)..=last_window {
            for i in 0..self.sc.flows.len() {
                if !self.sc.flows[i].managed {
                    continue;
                }
                let f = FlowId(i);
                let sample = self.measure(f, k - 1);
                self.rows.push(WindowRow {
                    window_end: SimTime::from_micros(k * interval),
                    flow: f,
                    dmr: sample.dmr,
                    period_us: self.flows[i].period_us,
                    released: sample.released,
                    missed: sample.missed,
                });
            }
        }
        let finals: Vec<(String, bool, u64)> = self
            .sc
            .flows
            .iter()
            .enumerate()
            .map(|(i, spec)| (spec.name.clone(), spec.managed, self.flows[i].period_us))
            .collect();
        let summary = summarize(
            &self.ledger,
            &finals,
            core::mem::take(&mut self.rows),
            self.sc.seed,
            self.sc.config_digest,
        );
        RunOutput {
            summary,
            ledger: self.ledger,
            period_changes: self.period_changes,
            trace: self.trace,
        }
    }
}
