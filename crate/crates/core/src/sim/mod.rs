//! Deterministic discrete-event kernel.
//!
//! One run owns every node, the event queue and the energy ledgers. The
//! radio is an ideal fixed-range broadcast channel: a frame reaches every
//! neighbor after its airtime, nothing is lost, and a receiver that is
//! asleep at delivery time simply misses it. The seeded initial sleep phase
//! is the only randomness.

mod queue;
pub mod trace;

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::energy::{idle_energy, rx_energy, tx_energy, EnergyLedger, PowerMode, PowerProfile};
use crate::error::ConfigError;
use crate::geom::{Arrival, NodeId, SimTime, Vec2};
use crate::protocol::{Effect, Message, NodeCtx, NodeState, PasParams};
use crate::stimulus::StimulusModel;

pub use queue::{EventKind, EventQueue, SimEvent};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy {
    /// Every node stays awake for the whole run and exchanges nothing.
    NonSleeping,
    /// Adaptive sleeping. An `alert_threshold` of zero is the
    /// stimulus-based (SAS) baseline.
    Pas(PasParams),
}

impl Strategy {
    pub fn label(&self) -> &'static str {
        match self {
            Strategy::NonSleeping => "ns",
            Strategy::Pas(p) if p.alert_threshold == 0.0 => "sas",
            Strategy::Pas(_) => "pas",
        }
    }

    pub fn params(&self) -> Option<&PasParams> {
        match self {
            Strategy::NonSleeping => None,
            Strategy::Pas(p) => Some(p),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub nodes: Vec<(NodeId, Vec2)>,
    pub radio_range: f64,
    pub stimulus: StimulusModel,
    pub strategy: Strategy,
    pub power: PowerProfile,
    pub horizon: f64,
    pub seed: u64,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.nodes.is_empty() {
            return Err(ConfigError::NoNodes);
        }
        if !(self.radio_range.is_finite() && self.radio_range > 0.0) {
            return Err(ConfigError::RadioRange(self.radio_range));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(ConfigError::Horizon(self.horizon));
        }
        for (index, (id, pos)) in self.nodes.iter().enumerate() {
            if id.index() != index {
                return Err(ConfigError::NodeIds { index, found: id.0 });
            }
            if !pos.is_finite() {
                return Err(ConfigError::NonFinitePosition(id.0));
            }
        }
        for (i, (a, pa)) in self.nodes.iter().enumerate() {
            for (b, pb) in &self.nodes[i + 1..] {
                if pa == pb {
                    return Err(ConfigError::DuplicatePosition(a.0, b.0));
                }
            }
        }
        self.stimulus.validate()?;
        self.power.validate()?;
        if let Strategy::Pas(p) = &self.strategy {
            p.validate()?;
        }
        Ok(())
    }

    /// Nodes within `radio_range` of `id` (inclusive), excluding itself.
    pub fn neighbors(&self, id: NodeId) -> Vec<NodeId> {
        let here = self.nodes[id.index()].1;
        self.nodes
            .iter()
            .filter(|(other, pos)| *other != id && here.distance(*pos) <= self.radio_range)
            .map(|(other, _)| *other)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub trace: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub at: SimTime,
    pub node: NodeId,
    pub from: NodeState,
    pub to: NodeState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeResult {
    pub id: NodeId,
    pub pos: Vec2,
    /// Ground truth from the stimulus model.
    pub first_arrival: Arrival,
    /// First time the node sensed the stimulus.
    pub detection_time: Option<SimTime>,
    pub ledger: EnergyLedger,
    /// Seconds spent in each state, indexed by [`NodeState::index`].
    pub occupancy: [f64; 3],
    pub msgs_tx: u64,
    pub msgs_rx: u64,
    pub malformed: u64,
    /// Length of the sleep in progress when the stimulus arrived, if asleep.
    pub sleep_interval_at_arrival: Option<f64>,
    pub final_state: NodeState,
    pub final_sleep_interval: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub scenario: String,
    pub strategy: Strategy,
    pub horizon: f64,
    pub seed: u64,
    pub nodes: Vec<NodeResult>,
    pub transitions: Vec<Transition>,
    pub events_processed: u64,
    pub stimulus_arrivals: u64,
    pub trace: Option<String>,
}

impl RunResult {
    pub fn alert_occupancy(&self) -> f64 {
        self.nodes.iter().map(|n| n.occupancy[NodeState::Alert.index()]).sum()
    }
}

struct NodeSim {
    ctx: NodeCtx,
    neighbors: Vec<NodeId>,
    first_arrival: Arrival,
    mode: PowerMode,
    mode_since: SimTime,
    /// Length of the current (or last) sleep.
    sleep_len: f64,
    state_since: SimTime,
    result: NodeResult,
}

struct Kernel<'a> {
    scenario: &'a Scenario,
    queue: EventQueue,
    nodes: Vec<NodeSim>,
    transitions: Vec<Transition>,
    trace: Option<String>,
    /// Outcome tokens for the event being processed.
    detail: Vec<String>,
    events_processed: u64,
    stimulus_arrivals: u64,
}

/// Runs `scenario` to its horizon.
pub fn run(scenario: &Scenario, options: RunOptions) -> Result<RunResult, ConfigError> {
    scenario.validate()?;
    let mut kernel = Kernel::new(scenario, options);
    kernel.run();
    Ok(kernel.finish())
}

impl<'a> Kernel<'a> {
    fn new(scenario: &'a Scenario, options: RunOptions) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
        let mut queue = EventQueue::new();
        queue.push(SimTime::from_secs(scenario.horizon), EventKind::Horizon);

        let params = scenario.strategy.params().copied().unwrap_or_default();
        let mut nodes = Vec::with_capacity(scenario.nodes.len());
        for &(id, pos) in &scenario.nodes {
            let mut ctx = NodeCtx::new(id, pos, params);
            if scenario.strategy == Strategy::NonSleeping {
                ctx.power = PowerMode::Awake;
            }
            let first_arrival = scenario.stimulus.first_arrival(pos);
            if let Arrival::At(t) = first_arrival {
                if t.secs() <= scenario.horizon {
                    queue.push(t, EventKind::StimulusArrives(id));
                }
            }
            // the opening sleep lasts until a random phase offset
            let mut sleep_len = 0.0;
            if let Strategy::Pas(p) = &scenario.strategy {
                sleep_len = rng.gen::<f64>() * p.initial_sleep;
                queue.push(SimTime::from_secs(sleep_len), EventKind::NodeWake(id));
            }
            let mode = ctx.power;
            nodes.push(NodeSim {
                neighbors: scenario.neighbors(id),
                first_arrival,
                mode,
                mode_since: SimTime::ZERO,
                sleep_len,
                state_since: SimTime::ZERO,
                result: NodeResult {
                    id,
                    pos,
                    first_arrival,
                    detection_time: None,
                    ledger: EnergyLedger::default(),
                    occupancy: [0.0; 3],
                    msgs_tx: 0,
                    msgs_rx: 0,
                    malformed: 0,
                    sleep_interval_at_arrival: None,
                    final_state: NodeState::Safe,
                    final_sleep_interval: 0.0,
                },
                ctx,
            });
        }
        Kernel {
            scenario,
            queue,
            nodes,
            transitions: Vec::new(),
            trace: options.trace.then(String::new),
            detail: Vec::new(),
            events_processed: 0,
            stimulus_arrivals: 0,
        }
    }

    fn run(&mut self) {
        while let Some(event) = self.queue.pop() {
            self.events_processed += 1;
            self.detail.clear();
            let now = event.at;
            match &event.kind {
                EventKind::Horizon => self.close_books(now),
                EventKind::StimulusArrives(id) => {
                    self.stimulus_arrivals += 1;
                    self.stimulus_arrives(*id, now);
                }
                EventKind::NodeWake(id) => {
                    let covered_now = self.nodes[id.index()].first_arrival.finite().is_some_and(|a| a <= now);
                    self.step(*id, now, |ctx| ctx.on_wake(covered_now, now));
                }
                EventKind::CollectionWindowEnd(id) => self.step(*id, now, |ctx| ctx.on_window_end(now)),
                EventKind::RecedeTimeout(id) => self.step(*id, now, |ctx| ctx.on_recede_timeout(now)),
                EventKind::Deliver { msg, to } => self.deliver(msg, *to, now),
            }
            self.write_trace(&event);
            if event.kind == EventKind::Horizon {
                break;
            }
        }
    }

    fn deliver(&mut self, msg: &Message, to: NodeId, now: SimTime) {
        let bytes = msg.wire_len();
        self.detail.push(format!("from={}", msg.sender()));
        self.detail.push(format!("msg={}", msg.kind_name()));
        let node = &mut self.nodes[to.index()];
        if !node.ctx.is_awake() {
            self.detail.push("drop".to_string());
            return;
        }
        node.result.ledger.rx_j += rx_energy(bytes, &self.scenario.power).expect("non-empty frame");
        node.result.msgs_rx += 1;
        self.detail.push(format!("rx={bytes}"));
        self.step(to, now, |ctx| ctx.on_message(msg, now));
    }

    fn stimulus_arrives(&mut self, id: NodeId, now: SimTime) {
        let node = &mut self.nodes[id.index()];
        if !node.ctx.is_awake() {
            node.result.sleep_interval_at_arrival = Some(node.sleep_len);
        }
        match self.scenario.strategy {
            Strategy::NonSleeping => self.step(id, now, |ctx| {
                ctx.state = NodeState::Covered;
                ctx.detection_time = Some(now);
                Vec::new()
            }),
            Strategy::Pas(_) => self.step(id, now, |ctx| ctx.on_detect(now)),
        }
    }

    /// Runs one handler on a node and applies its bookkeeping and effects.
    fn step(&mut self, id: NodeId, now: SimTime, handler: impl FnOnce(&mut NodeCtx) -> Vec<Effect>) {
        let node = &mut self.nodes[id.index()];
        let state_before = node.ctx.state;
        let effects = handler(&mut node.ctx);
        let state_after = node.ctx.state;

        if state_after != state_before {
            node.result.occupancy[state_before.index()] += now.secs() - node.state_since.secs();
            node.state_since = now;
            if state_after == NodeState::Covered && node.result.detection_time.is_none() {
                node.result.detection_time = node.ctx.detection_time;
            }
            self.transitions.push(Transition { at: now, node: id, from: state_before, to: state_after });
            self.detail.push(format!("state={state_before:?}>{state_after:?}"));
        }
        let mode_after = node.ctx.power;
        if mode_after != node.mode {
            let spent = idle_energy(node.mode, now.secs() - node.mode_since.secs(), &self.scenario.power)
                .expect("time moves forward");
            node.result.ledger.charge_idle(node.mode, spent);
            if mode_after == PowerMode::Awake {
                node.result.ledger.awake_j += self.scenario.power.wakeup_j();
            }
            node.mode = mode_after;
            node.mode_since = now;
            self.detail.push(format!("power={mode_after:?}"));
        }

        for effect in effects {
            match effect {
                Effect::Broadcast(msg) => self.broadcast(id, msg, now),
                Effect::CloseWindowAt(t) => {
                    self.queue.push(t, EventKind::CollectionWindowEnd(id));
                }
                Effect::SleepUntil(t) => {
                    self.nodes[id.index()].sleep_len = t.secs() - now.secs();
                    self.queue.push(t, EventKind::NodeWake(id));
                }
                Effect::RecedeCheckAt(t) => {
                    self.queue.push(t, EventKind::RecedeTimeout(id));
                }
            }
        }
    }

    fn broadcast(&mut self, from: NodeId, msg: Message, now: SimTime) {
        let power = &self.scenario.power;
        let bytes = msg.wire_len();
        let sender = &mut self.nodes[from.index()];
        sender.result.ledger.tx_j += tx_energy(bytes, power).expect("non-empty frame");
        sender.result.msgs_tx += 1;
        self.detail.push(format!("tx={bytes}"));
        let at = now.after(power.airtime(bytes));
        for &to in &sender.neighbors {
            self.queue.push(at, EventKind::Deliver { msg, to });
        }
    }

    fn close_books(&mut self, now: SimTime) {
        for node in &mut self.nodes {
            let spent = idle_energy(node.mode, now.secs() - node.mode_since.secs(), &self.scenario.power)
                .expect("time moves forward");
            node.result.ledger.charge_idle(node.mode, spent);
            node.mode_since = now;
            node.result.occupancy[node.ctx.state.index()] += now.secs() - node.state_since.secs();
            node.state_since = now;
        }
    }

    fn write_trace(&mut self, event: &SimEvent) {
        let Some(out) = self.trace.as_mut() else { return };
        let node = event.kind.node().map_or_else(|| "-".to_string(), |n| n.to_string());
        let detail = if self.detail.is_empty() { "-".to_string() } else { self.detail.join(" ") };
        let _ = writeln!(out, "{}\t{}\t{}\t{}\t{}", event.at, event.seq, event.kind.name(), node, detail);
    }

    fn finish(self) -> RunResult {
        let nodes = self
            .nodes
            .into_iter()
            .map(|n| NodeResult {
                malformed: n.ctx.malformed,
                final_state: n.ctx.state,
                final_sleep_interval: n.ctx.sleep_interval,
                ..n.result
            })
            .collect();
        RunResult {
            scenario: self.scenario.name.clone(),
            strategy: self.scenario.strategy,
            horizon: self.scenario.horizon,
            seed: self.scenario.seed,
            nodes,
            transitions: self.transitions,
            events_processed: self.events_processed,
            stimulus_arrivals: self.stimulus_arrivals,
            trace: self.trace,
        }
    }
}
