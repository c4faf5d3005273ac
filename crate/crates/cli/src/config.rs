//! Scenario configuration files: a single JSON document describing one
//! experiment, validated as a whole so a broken file reports every
//! problem at once, not just the first.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wsansim_core::control::ControllerParams;
use wsansim_core::mac::MacParams;
use wsansim_core::scenario::{Activation, FlowSpec, NodeSpec, Scenario};
use wsansim_core::{ManagerKind, SimTime};

/// Data frame size on the air: 32 bytes of payload plus 13 of overhead.
pub const FRAME_BYTES: u32 = 45;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid scenario:\n{}", errors.join("\n"))]
    Invalid { errors: Vec<String> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Manager {
    #[default]
    None,
    Fuzzy,
}

impl From<Manager> for ManagerKind {
    fn from(m: Manager) -> Self {
        match m {
            Manager::None => ManagerKind::None,
            Manager::Fuzzy => ManagerKind::Fuzzy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoleDecl {
    Source,
    Interferer,
    Relay,
    Actuator,
}

impl From<RoleDecl> for wsansim_core::Role {
    fn from(r: RoleDecl) -> Self {
        match r {
            RoleDecl::Source => wsansim_core::Role::Source,
            RoleDecl::Interferer => wsansim_core::Role::Interferer,
            RoleDecl::Relay => wsansim_core::Role::Relay,
            RoleDecl::Actuator => wsansim_core::Role::Actuator,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDecl {
    pub id: String,
    pub role: RoleDecl,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActivationDecl {
    pub on_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub off_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowDecl {
    pub id: String,
    pub source: String,
    pub sink: String,
    pub route: Vec<String>,
    #[serde(default = "default_period_ms")]
    pub period_ms: f64,
    #[serde(default = "default_period_ms")]
    pub period_min_ms: f64,
    #[serde(default = "default_period_max_ms")]
    pub period_max_ms: f64,
    #[serde(default = "default_true")]
    pub managed: bool,
    #[serde(default = "default_activation")]
    pub activation: Vec<ActivationDecl>,
}

fn default_period_ms() -> f64 {
    10.0
}

fn default_period_max_ms() -> f64 {
    500.0
}

fn default_true() -> bool {
    true
}

fn default_activation() -> Vec<ActivationDecl> {
    vec![ActivationDecl { on_s: 0.0, off_s: None }]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MacDecl {
    pub data_rate_bps: u64,
    pub symbol_us: u64,
    pub unit_backoff_symbols: u64,
    pub min_be: u8,
    pub max_be: u8,
    pub max_csma_backoffs: u8,
    pub cca_symbols: u64,
    pub ack_enabled: bool,
    pub max_retries: u8,
    pub ack_bytes: u32,
    pub ifs_us: u64,
    pub queue_capacity: usize,
}

impl Default for MacDecl {
    fn default() -> Self {
        let p = MacParams::default();
        MacDecl {
            data_rate_bps: p.data_rate_bps,
            symbol_us: p.symbol_us,
            unit_backoff_symbols: p.unit_backoff_symbols,
            min_be: p.min_be,
            max_be: p.max_be,
            max_csma_backoffs: p.max_csma_backoffs,
            cca_symbols: p.cca_symbols,
            ack_enabled: p.ack_enabled,
            max_retries: p.max_retries,
            ack_bytes: p.ack_bytes,
            ifs_us: p.ifs_us,
            queue_capacity: p.queue_capacity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControllerDecl {
    pub setpoint: f64,
    pub interval_s: f64,
    pub e_gain: f64,
    pub de_gain: f64,
    pub u_gain: f64,
}

impl Default for ControllerDecl {
    fn default() -> Self {
        let p = ControllerParams::default();
        ControllerDecl {
            setpoint: p.setpoint,
            interval_s: p.interval_us as f64 / 1e6,
            e_gain: p.e_gain,
            de_gain: p.de_gain,
            u_gain: p.u_gain,
        }
    }
}

/// The on-disk scenario document. `parse(serialize(c)) == c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default = "default_duration_s")]
    pub duration_s: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub manager: Manager,
    pub nodes: Vec<NodeDecl>,
    pub flows: Vec<FlowDecl>,
    #[serde(default)]
    pub mac: MacDecl,
    #[serde(default)]
    pub controller: ControllerDecl,
}

fn default_duration_s() -> f64 {
    100.0
}

fn default_seed() -> u64 {
    1
}

/// Command-line overrides folded into the file before validation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub manager: Option<Manager>,
    pub seed: Option<u64>,
    pub duration_s: Option<f64>,
}

impl ScenarioFile {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let bytes = fs::read(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_slice(&bytes).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn apply(&mut self, ov: &Overrides) {
        if let Some(m) = ov.manager {
            self.manager = m;
        }
        if let Some(s) = ov.seed {
            self.seed = s;
        }
        if let Some(d) = ov.duration_s {
            self.duration_s = d;
        }
    }

    /// Checks every field, returning the full list of problems.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut errors = Vec::new();
        let mut err = |msg: String| errors.push(msg);

        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            err(format!("duration_s: must be > 0, got {}", self.duration_s));
        }
        if self.nodes.is_empty() {
            err("nodes: at least one node is required".into());
        }
        for (i, n) in self.nodes.iter().enumerate() {
            if n.id.is_empty() {
                err(format!("nodes[{i}].id: must not be empty"));
            }
            if self.nodes[..i].iter().any(|m| m.id == n.id) {
                err(format!("nodes[{i}].id: duplicate node id {}", n.id));
            }
        }
        if self.flows.is_empty() {
            err("flows: at least one flow is required".into());
        }
        let declared = |id: &str| self.nodes.iter().any(|n| n.id == id);
        let role_of = |id: &str| self.nodes.iter().find(|n| n.id == id).map(|n| n.role);
        for (i, f) in self.flows.iter().enumerate() {
            let at = |field: &str| format!("flows[{i}].{field}");
            if self.flows[..i].iter().any(|g| g.id == f.id) {
                err(format!("{}: duplicate flow id {}", at("id"), f.id));
            }
            if self.flows[..i].iter().any(|g| g.source == f.source) {
                err(format!("{}: node {} already sources another flow", at("source"), f.source));
            }
            if !declared(&f.source) {
                err(format!("{}: names undeclared node {}", at("source"), f.source));
            }
            if !declared(&f.sink) {
                err(format!("{}: names undeclared node {}", at("sink"), f.sink));
            }
            for hop in &f.route {
                if !declared(hop) {
                    err(format!("{}: names undeclared node {hop}", at("route")));
                }
            }
            if f.route.len() < 2 {
                err(format!("{}: needs at least source and sink", at("route")));
            } else {
                if f.route.first() != Some(&f.source) {
                    err(format!("{}: must start at source {}", at("route"), f.source));
                }
                if f.route.last() != Some(&f.sink) {
                    err(format!("{}: must end at sink {}", at("route"), f.sink));
                }
                for (j, hop) in f.route.iter().enumerate() {
                    if f.route[..j].contains(hop) {
                        err(format!("{}: revisits node {hop}", at("route")));
                    }
                }
            }
            match role_of(&f.source) {
                Some(RoleDecl::Source) | Some(RoleDecl::Interferer) | None => {}
                Some(_) => err(format!("{}: node {} is not a traffic source", at("source"), f.source)),
            }
            if role_of(&f.source) == Some(RoleDecl::Interferer) && f.managed {
                err(format!("{}: interferer flows cannot be managed", at("managed")));
            }
            if !(f.period_min_ms.is_finite() && f.period_min_ms > 0.0) {
                err(format!("{}: must be > 0, got {}", at("period_min_ms"), f.period_min_ms));
            }
            if !(f.period_ms >= f.period_min_ms && f.period_ms <= f.period_max_ms) {
                err(format!(
                    "{}: {} outside [{}, {}]",
                    at("period_ms"),
                    f.period_ms,
                    f.period_min_ms,
                    f.period_max_ms
                ));
            }
            let mut prev_off = f64::NEG_INFINITY;
            for (j, a) in f.activation.iter().enumerate() {
                let field = format!("flows[{i}].activation[{j}]");
                if !(a.on_s.is_finite() && a.on_s >= 0.0) {
                    err(format!("{field}.on_s: must be >= 0"));
                }
                if j > 0 && a.on_s < prev_off {
                    err(format!("{field}.on_s: overlaps the previous interval"));
                }
                match a.off_s {
                    Some(off) if off <= a.on_s => {
                        err(format!("{field}.off_s: must be after on_s"));
                    }
                    Some(off) => prev_off = off,
                    None if j != f.activation.len() - 1 => {
                        err(format!("{field}.off_s: only the last interval may be open-ended"));
                    }
                    None => {}
                }
            }
        }
        let m = &self.mac;
        if m.data_rate_bps == 0 {
            err("mac.data_rate_bps: must be > 0".into());
        }
        if m.symbol_us == 0 {
            err("mac.symbol_us: must be > 0".into());
        }
        if m.unit_backoff_symbols == 0 {
            err("mac.unit_backoff_symbols: must be > 0".into());
        }
        if m.min_be > m.max_be {
            err(format!("mac.min_be: {} exceeds max_be {}", m.min_be, m.max_be));
        }
        if m.max_be > 16 {
            err(format!("mac.max_be: {} exceeds the supported ceiling of 16", m.max_be));
        }
        if m.ack_bytes == 0 {
            err("mac.ack_bytes: must be > 0".into());
        }
        if m.queue_capacity == 0 {
            err("mac.queue_capacity: must be > 0".into());
        }
        let c = &self.controller;
        if !(c.setpoint > 0.0 && c.setpoint < 1.0) {
            err(format!("controller.setpoint: must be in (0, 1), got {}", c.setpoint));
        }
        if !(c.interval_s.is_finite() && c.interval_s > 0.0) {
            err(format!("controller.interval_s: must be > 0, got {}", c.interval_s));
        }
        for (name, v) in [("e_gain", c.e_gain), ("de_gain", c.de_gain), ("u_gain", c.u_gain)] {
            if !(v.is_finite() && v > 0.0) {
                err(format!("controller.{name}: must be > 0, got {v}"));
            }
        }

        if errors.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid { errors })
        }
    }

    /// Builds the runnable scenario. Call after `validate`.
    pub fn to_scenario(&self) -> Scenario {
        let nodes = self
            .nodes
            .iter()
            .map(|n| NodeSpec { name: n.id.clone(), role: n.role.into() })
            .collect();
        let flows = self
            .flows
            .iter()
            .map(|f| FlowSpec {
                name: f.id.clone(),
                source: f.source.clone(),
                sink: f.sink.clone(),
                route: f.route.clone(),
                period_us: ms_to_us(f.period_ms),
                period_min_us: ms_to_us(f.period_min_ms),
                period_max_us: ms_to_us(f.period_max_ms),
                managed: f.managed,
                activation: f
                    .activation
                    .iter()
                    .map(|a| Activation {
                        on: SimTime::from_micros(s_to_us(a.on_s)),
                        off: a.off_s.map(|o| SimTime::from_micros(s_to_us(o))),
                    })
                    .collect(),
                frame_bytes: FRAME_BYTES,
            })
            .collect();
        Scenario {
            duration: SimTime::from_micros(s_to_us(self.duration_s)),
            seed: self.seed,
            manager: self.manager.into(),
            nodes,
            flows,
            mac: MacParams {
                data_rate_bps: self.mac.data_rate_bps,
                symbol_us: self.mac.symbol_us,
                unit_backoff_symbols: self.mac.unit_backoff_symbols,
                min_be: self.mac.min_be,
                max_be: self.mac.max_be,
                max_csma_backoffs: self.mac.max_csma_backoffs,
                cca_symbols: self.mac.cca_symbols,
                ack_enabled: self.mac.ack_enabled,
                max_retries: self.mac.max_retries,
                ack_bytes: self.mac.ack_bytes,
                ifs_us: self.mac.ifs_us,
                queue_capacity: self.mac.queue_capacity,
            },
            controller: ControllerParams {
                setpoint: self.controller.setpoint,
                interval_us: s_to_us(self.controller.interval_s),
                e_gain: self.controller.e_gain,
                de_gain: self.controller.de_gain,
                u_gain: self.controller.u_gain,
            },
            config_digest: self.digest(),
        }
    }

    /// FNV-1a over the canonical serialization: identifies exactly what
    /// ran, including any command-line overrides.
    pub fn digest(&self) -> u64 {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let canonical = serde_json::to_string(self).expect("scenario serializes");
        let mut h = OFFSET;
        for b in canonical.as_bytes() {
            h ^= *b as u64;
            h = h.wrapping_mul(PRIME);
        }
        h
    }
}

fn ms_to_us(ms: f64) -> u64 {
    (ms * 1000.0).round() as u64
}

fn s_to_us(s: f64) -> u64 {
    (s * 1e6).round() as u64
}

/// Loads, merges overrides, validates and lowers a scenario file.
pub fn load_scenario(
    path: &Path,
    overrides: &Overrides,
) -> Result<(ScenarioFile, Scenario), ConfigError> {
    let mut file = ScenarioFile::load(path)?;
    file.apply(overrides);
    file.validate()?;
    let scenario = file.to_scenario();
    Ok((file, scenario))
}
