//! Scenario description: nodes, flows, routes and activation schedules.
//!
//! A `Scenario` is a plain value. Name resolution and structural checks
//! happen once in [`Scenario::resolve`]; richer validation with field
//! paths belongs to whatever front end built the value.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::control::ControllerParams;
use crate::mac::MacParams;
use crate::time::SimTime;

/// Index of a node in `Scenario::nodes`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

/// Index of a flow in `Scenario::flows`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FlowId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Source,
    /// Loads the channel but is never period-adjusted by any manager.
    Interferer,
    Relay,
    Actuator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ManagerKind {
    /// Open loop: periods never change.
    None,
    /// Per-flow fuzzy feedback scheduler.
    Fuzzy,
}

impl ManagerKind {
    pub fn label(self) -> &'static str {
        match self {
            ManagerKind::None => "none",
            ManagerKind::Fuzzy => "fuzzy",
        }
    }
}

#[derive(Debug, Clone)]
pub struct NodeSpec {
    pub name: String,
    pub role: Role,
}

/// One `[on, off)` activity interval of a flow's source; `off = None`
/// means active until run end.
#[derive(Debug, Clone, Copy)]
pub struct Activation {
    pub on: SimTime,
    pub off: Option<SimTime>,
}

#[derive(Debug, Clone)]
pub struct FlowSpec {
    pub name: String,
    /// Source node name.
    pub source: String,
    /// Sink node name.
    pub sink: String,
    /// Full hop list from source to sink, inclusive.
    pub route: Vec<String>,
    /// Initial sampling period, µs.
    pub period_us: u64,
    pub period_min_us: u64,
    pub period_max_us: u64,
    /// Whether a QoS manager may adjust this flow's period.
    pub managed: bool,
    pub activation: Vec<Activation>,
    /// Data frame size on the air, bytes.
    pub frame_bytes: u32,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub duration: SimTime,
    pub seed: u64,
    pub manager: ManagerKind,
    pub nodes: Vec<NodeSpec>,
    pub flows: Vec<FlowSpec>,
    pub mac: MacParams,
    pub controller: ControllerParams,
    /// Caller-supplied digest of the originating config, echoed in the
    /// run summary. Zero when the scenario was built in code.
    pub config_digest: u64,
}

/// Structural problems found while resolving a scenario.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScenarioError {
    UnknownNode { flow: String, name: String },
    BadRoute { flow: String, reason: &'static str },
    MultipleFlowsPerSource { node: String },
    BadActivation { flow: String },
    BadPeriods { flow: String },
    Empty(&'static str),
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioError::UnknownNode { flow, name } => {
                write!(f, "flow {flow}: route names undeclared node {name}")
            }
            ScenarioError::BadRoute { flow, reason } => write!(f, "flow {flow}: {reason}"),
            ScenarioError::MultipleFlowsPerSource { node } => {
                write!(f, "node {node} sources more than one flow")
            }
            ScenarioError::BadActivation { flow } => {
                write!(f, "flow {flow}: activation intervals must be ordered and disjoint")
            }
            ScenarioError::BadPeriods { flow } => {
                write!(f, "flow {flow}: requires 0 < period_min <= period <= period_max")
            }
            ScenarioError::Empty(what) => write!(f, "scenario declares no {what}"),
        }
    }
}

/// A flow with node names resolved to ids.
#[derive(Debug, Clone)]
pub struct ResolvedFlow {
    pub source: NodeId,
    pub sink: NodeId,
    pub route: Vec<NodeId>,
}

impl Scenario {
    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.name == name).map(NodeId)
    }

    /// Resolves route names and checks the structural invariants the
    /// simulator relies on. Returns one error per call; front ends that
    /// want all errors at once run their own pass first.
    pub fn resolve(&self) -> Result<Vec<ResolvedFlow>, ScenarioError> {
        if self.nodes.is_empty() {
            return Err(ScenarioError::Empty("nodes"));
        }
        if self.flows.is_empty() {
            return Err(ScenarioError::Empty("flows"));
        }
        let mut sources_seen: Vec<NodeId> = Vec::new();
        let mut out = Vec::with_capacity(self.flows.len());
        for flow in &self.flows {
            let lookup = |name: &str| {
                self.node_id(name).ok_or_else(|| ScenarioError::UnknownNode {
                    flow: flow.name.clone(),
                    name: String::from(name),
                })
            };
            let source = lookup(&flow.source)?;
            let sink = lookup(&flow.sink)?;
            let route: Vec<NodeId> =
                flow.route.iter().map(|h| lookup(h)).collect::<Result<_, _>>()?;
            let bad = |reason| ScenarioError::BadRoute { flow: flow.name.clone(), reason };
            if route.len() < 2 {
                return Err(bad("route needs at least source and sink"));
            }
            if route[0] != source {
                return Err(bad("route must start at the source"));
            }
            if *route.last().unwrap() != sink {
                return Err(bad("route must end at the sink"));
            }
            for (i, hop) in route.iter().enumerate() {
                if route[..i].contains(hop) {
                    return Err(bad("route revisits a node"));
                }
            }
            if sources_seen.contains(&source) {
                return Err(ScenarioError::MultipleFlowsPerSource {
                    node: flow.source.clone(),
                });
            }
            sources_seen.push(source);
            if !(flow.period_min_us > 0
                && flow.period_min_us <= flow.period_us
                && flow.period_us <= flow.period_max_us)
            {
                return Err(ScenarioError::BadPeriods { flow: flow.name.clone() });
            }
            let mut prev_off = SimTime::ZERO;
            for (i, act) in flow.activation.iter().enumerate() {
                let ordered = i == 0 || act.on >= prev_off;
                let bounded = match act.off {
                    Some(off) => {
                        prev_off = off;
                        off > act.on
                    }
                    // open-ended interval must be the last one
                    None => i == flow.activation.len() - 1,
                };
                if !(ordered && bounded) {
                    return Err(ScenarioError::BadActivation { flow: flow.name.clone() });
                }
            }
            out.push(ResolvedFlow { source, sink, route });
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::ControllerParams;
    use crate::mac::MacParams;
    use alloc::string::ToString;
    use alloc::vec;

    fn base() -> Scenario {
        Scenario {
            duration: SimTime::from_secs(1),
            seed: 1,
            manager: ManagerKind::None,
            nodes: vec![
                NodeSpec { name: "s1".to_string(), role: Role::Source },
                NodeSpec { name: "a1".to_string(), role: Role::Actuator },
            ],
            flows: vec![FlowSpec {
                name: "s1".to_string(),
                source: "s1".to_string(),
                sink: "a1".to_string(),
                route: vec!["s1".to_string(), "a1".to_string()],
                period_us: 10_000,
                period_min_us: 10_000,
                period_max_us: 500_000,
                managed: true,
                activation: vec![Activation { on: SimTime::ZERO, off: None }],
                frame_bytes: 45,
            }],
            mac: MacParams::default(),
            controller: ControllerParams::default(),
            config_digest: 0,
        }
    }

    #[test]
    fn resolves_valid_scenario() {
        let sc = base();
        let resolved = sc.resolve().unwrap();
        assert_eq!(resolved[0].route, vec![NodeId(0), NodeId(1)]);
    }

    #[test]
    fn unknown_hop_is_rejected() {
        let mut sc = base();
        sc.flows[0].route[1] = "ghost".to_string();
        assert!(matches!(sc.resolve(), Err(ScenarioError::UnknownNode { .. })));
    }

    #[test]
    fn route_must_span_source_to_sink() {
        let mut sc = base();
        sc.flows[0].route = vec!["a1".to_string(), "s1".to_string()];
        assert!(matches!(sc.resolve(), Err(ScenarioError::BadRoute { .. })));
    }

    #[test]
    fn overlapping_activation_rejected() {
        let mut sc = base();
        sc.flows[0].activation = vec![
            Activation { on: SimTime::ZERO, off: Some(SimTime::from_secs(2)) },
            Activation { on: SimTime::from_secs(1), off: None },
        ];
        assert!(matches!(sc.resolve(), Err(ScenarioError::BadActivation { .. })));
    }

    #[test]
    fn off_before_on_rejected() {
        let mut sc = base();
        sc.flows[0].activation =
            vec![Activation { on: SimTime::from_secs(2), off: Some(SimTime::from_secs(1)) }];
        assert!(matches!(sc.resolve(), Err(ScenarioError::BadActivation { .. })));
    }
}
