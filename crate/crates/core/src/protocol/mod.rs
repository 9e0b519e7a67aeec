//! Per-node adaptive sleeping state machine.
//!
//! A node is `Safe` (may sleep), `Alert` (front expected within the alert
//! threshold, stays awake) or `Covered` (has sensed the stimulus). Handlers
//! mutate the node and return the [`Effect`]s the simulation kernel must
//! carry out: broadcasts and timers.
//!
//! Transitions:
//!
//! ```text
//! Safe  -> Covered  stimulus sensed (awake, or on wake-up)
//! Alert -> Covered  stimulus sensed
//! Safe  -> Alert    predicted arrival < alert_threshold after a wake-up poll
//! Alert -> Safe     recomputed arrival > alert_threshold
//! Covered -> Safe   stimulus absent for detection_timeout
//! ```

pub mod wire;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::energy::PowerMode;
use crate::error::ConfigError;
use crate::estimation::{
    actual_velocity, expected_arrival_time, expected_velocity, CoveredObservation, NeighborEstimate,
};
use crate::geom::{Arrival, NodeId, SimTime, Vec2};

pub use wire::{Message, WireError};

/// How long a node listens for RESPONSEs after sending a REQUEST.
pub const COLLECTION_WINDOW: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NodeState {
    Safe,
    Alert,
    Covered,
}

impl NodeState {
    pub const ALL: [NodeState; 3] = [NodeState::Safe, NodeState::Alert, NodeState::Covered];

    pub fn code(self) -> u8 {
        match self {
            NodeState::Safe => 0,
            NodeState::Alert => 1,
            NodeState::Covered => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(NodeState::Safe),
            1 => Some(NodeState::Alert),
            2 => Some(NodeState::Covered),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        self.code() as usize
    }
}

/// The five legal state changes.
pub fn is_legal_transition(from: NodeState, to: NodeState) -> bool {
    use NodeState::*;
    matches!((from, to), (Safe, Covered) | (Alert, Covered) | (Safe, Alert) | (Alert, Safe) | (Covered, Safe))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PasParams {
    /// Predicted arrivals below this put a node on alert. Zero disables
    /// the alert state entirely.
    pub alert_threshold: f64,
    pub sleep_increment: f64,
    pub initial_sleep: f64,
    pub max_sleep: f64,
    pub detection_timeout: f64,
    pub rebroadcast_epsilon: f64,
}

impl Default for PasParams {
    fn default() -> Self {
        Self {
            alert_threshold: 10.0,
            sleep_increment: 1.0,
            initial_sleep: 1.0,
            max_sleep: 10.0,
            detection_timeout: 30.0,
            rebroadcast_epsilon: 0.10,
        }
    }
}

impl PasParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let err = |field, reason: &str| Err(ConfigError::Param { field, reason: reason.to_string() });
        if !(self.alert_threshold.is_finite() && self.alert_threshold >= 0.0) {
            return err("alert_threshold", "must be finite and >= 0");
        }
        for (field, v) in [
            ("sleep_increment", self.sleep_increment),
            ("initial_sleep", self.initial_sleep),
            ("max_sleep", self.max_sleep),
            ("detection_timeout", self.detection_timeout),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return err(field, "must be finite and > 0");
            }
        }
        if self.initial_sleep > self.max_sleep {
            return err("initial_sleep", "must not exceed max_sleep");
        }
        if !(self.rebroadcast_epsilon > 0.0 && self.rebroadcast_epsilon <= 1.0) {
            return err("rebroadcast_epsilon", "must be in (0, 1]");
        }
        Ok(())
    }
}

/// Next sleep interval of a safe node that saw no imminent threat.
pub fn sleep_schedule(current: f64, params: &PasParams) -> f64 {
    (current + params.sleep_increment).min(params.max_sleep)
}

/// Work the kernel performs on a node's behalf.
#[derive(Debug, Clone, PartialEq)]
pub enum Effect {
    Broadcast(Message),
    /// Deliver `on_window_end` at this time.
    CloseWindowAt(SimTime),
    /// The node powered down; deliver `on_wake` at this time.
    SleepUntil(SimTime),
    /// Deliver `on_recede_timeout` at this time.
    RecedeCheckAt(SimTime),
}

/// Latest RESPONSE heard from a neighbor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborReport {
    pub pos: Vec2,
    pub state: NodeState,
    pub velocity: Vec2,
    /// Absolute; a covered neighbor's detection time.
    pub arrival: Arrival,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Purpose {
    /// Safe node polling its neighborhood after waking.
    Poll,
    /// Newly covered node gathering detection times.
    Detect,
}

#[derive(Debug, Clone, PartialEq)]
struct Window {
    purpose: Purpose,
    ends_at: SimTime,
    responses: BTreeMap<NodeId, NeighborReport>,
}

/// State of one sensor node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeCtx {
    pub id: NodeId,
    pub pos: Vec2,
    pub state: NodeState,
    pub power: PowerMode,
    pub sleep_interval: f64,
    pub detection_time: Option<SimTime>,
    pub velocity_estimate: Option<Vec2>,
    /// Seconds from the moment of computation, as last estimated.
    pub predicted_arrival: Option<Arrival>,
    pub last_broadcast_arrival: Option<Arrival>,
    /// Frames that failed to decode.
    pub malformed: u64,
    params: PasParams,
    /// When `predicted_arrival` was computed.
    estimated_at: SimTime,
    window: Option<Window>,
    reports: BTreeMap<NodeId, NeighborReport>,
    clear_since: Option<SimTime>,
}

impl NodeCtx {
    /// A safe, sleeping node.
    pub fn new(id: NodeId, pos: Vec2, params: PasParams) -> Self {
        Self {
            id,
            pos,
            state: NodeState::Safe,
            power: PowerMode::Asleep,
            sleep_interval: params.initial_sleep,
            detection_time: None,
            velocity_estimate: None,
            predicted_arrival: None,
            last_broadcast_arrival: None,
            malformed: 0,
            params,
            estimated_at: SimTime::ZERO,
            window: None,
            reports: BTreeMap::new(),
            clear_since: None,
        }
    }

    pub fn params(&self) -> &PasParams {
        &self.params
    }

    pub fn is_awake(&self) -> bool {
        self.power == PowerMode::Awake
    }

    /// Stimulus sensed at `now`. Asleep nodes sense nothing.
    pub fn on_detect(&mut self, now: SimTime) -> Vec<Effect> {
        if !self.is_awake() || self.state == NodeState::Covered {
            return Vec::new();
        }
        self.state = NodeState::Covered;
        self.detection_time = Some(now);
        self.clear_since = None;
        self.open_window(Purpose::Detect, now)
    }

    pub fn on_message(&mut self, msg: &Message, now: SimTime) -> Vec<Effect> {
        if !self.is_awake() || msg.sender() == self.id {
            return Vec::new();
        }
        match *msg {
            Message::Request { .. } => match self.state {
                NodeState::Covered | NodeState::Alert => vec![Effect::Broadcast(self.response())],
                NodeState::Safe => Vec::new(),
            },
            Message::Response { sender, sender_pos, state, velocity, predicted_arrival } => {
                let report = NeighborReport { pos: sender_pos, state, velocity, arrival: predicted_arrival };
                self.reports.insert(sender, report);
                if let Some(w) = self.window.as_mut() {
                    w.responses.insert(sender, report);
                }
                if self.state == NodeState::Alert {
                    self.reestimate(now)
                } else {
                    Vec::new()
                }
            }
        }
    }

    /// Decodes a raw frame; undecodable frames are dropped and counted.
    pub fn on_frame(&mut self, frame: &[u8], now: SimTime) -> Vec<Effect> {
        match Message::decode(frame) {
            Ok(msg) => self.on_message(&msg, now),
            Err(_) => {
                self.malformed += 1;
                Vec::new()
            }
        }
    }

    /// Sleep timer expired. `covered_now` is whether the stimulus is at the
    /// node's position right now.
    pub fn on_wake(&mut self, covered_now: bool, now: SimTime) -> Vec<Effect> {
        if self.is_awake() || self.state != NodeState::Safe {
            return Vec::new();
        }
        self.power = PowerMode::Awake;
        if covered_now {
            self.on_detect(now)
        } else {
            self.open_window(Purpose::Poll, now)
        }
    }

    pub fn on_window_end(&mut self, now: SimTime) -> Vec<Effect> {
        match &self.window {
            Some(w) if w.ends_at <= now => {}
            _ => return Vec::new(),
        }
        let window = self.window.take().expect("window checked above");
        match (window.purpose, self.state) {
            (Purpose::Poll, NodeState::Safe) => self.finish_poll(&window, now),
            (Purpose::Detect, NodeState::Covered) => self.finish_detect(&window),
            _ => Vec::new(),
        }
    }

    /// The stimulus left the node's position at `now`.
    pub fn on_stimulus_cleared(&mut self, now: SimTime) -> Vec<Effect> {
        if self.state != NodeState::Covered {
            return Vec::new();
        }
        self.clear_since = Some(now);
        vec![Effect::RecedeCheckAt(now.after(self.params.detection_timeout))]
    }

    /// The stimulus is back at the node's position; cancels a pending timeout.
    pub fn on_stimulus_returned(&mut self) {
        self.clear_since = None;
    }

    pub fn on_recede_timeout(&mut self, now: SimTime) -> Vec<Effect> {
        match self.clear_since {
            Some(since)
                if self.state == NodeState::Covered && now.secs() - since.secs() >= self.params.detection_timeout =>
            {
                self.on_stimulus_receded(now)
            }
            _ => Vec::new(),
        }
    }

    /// Covered node whose stimulus has been gone for the detection timeout.
    pub fn on_stimulus_receded(&mut self, now: SimTime) -> Vec<Effect> {
        if self.state != NodeState::Covered {
            return Vec::new();
        }
        self.state = NodeState::Safe;
        self.detection_time = None;
        self.clear_since = None;
        self.velocity_estimate = None;
        self.predicted_arrival = None;
        self.last_broadcast_arrival = None;
        self.window = None;
        self.sleep_interval = self.params.initial_sleep;
        self.fall_asleep(now)
    }

    fn open_window(&mut self, purpose: Purpose, now: SimTime) -> Vec<Effect> {
        let ends_at = now.after(COLLECTION_WINDOW);
        self.window = Some(Window { purpose, ends_at, responses: BTreeMap::new() });
        vec![
            Effect::Broadcast(Message::Request { sender: self.id, sender_pos: self.pos }),
            Effect::CloseWindowAt(ends_at),
        ]
    }

    fn finish_poll(&mut self, window: &Window, now: SimTime) -> Vec<Effect> {
        let estimates = informative(window.responses.values(), now);
        if let Some((velocity, arrival)) = self.estimate(&estimates) {
            self.velocity_estimate = Some(velocity);
            self.predicted_arrival = Some(arrival);
            self.estimated_at = now;
            if arrival.as_secs() < self.params.alert_threshold {
                self.state = NodeState::Alert;
                self.sleep_interval = self.params.initial_sleep;
                self.last_broadcast_arrival = Some(arrival);
                return vec![Effect::Broadcast(self.response())];
            }
        }
        self.sleep_interval = sleep_schedule(self.sleep_interval, &self.params);
        self.fall_asleep(now)
    }

    fn finish_detect(&mut self, window: &Window) -> Vec<Effect> {
        let detected = self.detection_time.expect("covered node has a detection time");
        let observations: Vec<CoveredObservation> = window
            .responses
            .values()
            .filter(|r| r.state == NodeState::Covered)
            .filter_map(|r| {
                let at = r.arrival.finite()?;
                let elapsed = detected.secs() - at.secs();
                (elapsed > 0.0)
                    .then(|| CoveredObservation { neighbor_pos: r.pos, elapsed: SimTime::from_secs(elapsed) })
            })
            .collect();
        // without earlier-covered neighbors, keep whatever was expected while on alert
        if let Ok(v) = actual_velocity(self.pos, &observations) {
            self.velocity_estimate = Some(v);
        }
        self.predicted_arrival = Some(Arrival::At(SimTime::ZERO));
        match self.velocity_estimate {
            Some(_) => vec![Effect::Broadcast(self.response())],
            None => Vec::new(),
        }
    }

    /// Alert node folding a new RESPONSE into its prediction.
    fn reestimate(&mut self, now: SimTime) -> Vec<Effect> {
        let estimates = informative(self.reports.values(), now);
        let Some((velocity, arrival)) = self.estimate(&estimates) else {
            return Vec::new();
        };
        self.velocity_estimate = Some(velocity);
        self.predicted_arrival = Some(arrival);
        self.estimated_at = now;
        let mut effects = Vec::new();
        if significant_change(self.last_broadcast_arrival, arrival, self.params.rebroadcast_epsilon) {
            self.last_broadcast_arrival = Some(arrival);
            effects.push(Effect::Broadcast(self.response()));
        }
        if arrival.as_secs() > self.params.alert_threshold {
            self.state = NodeState::Safe;
            effects.extend(self.fall_asleep(now));
        }
        effects
    }

    fn estimate(&self, estimates: &[NeighborEstimate]) -> Option<(Vec2, Arrival)> {
        let velocity = expected_velocity(estimates).ok()?;
        let arrival = expected_arrival_time(self.pos, estimates).ok()?;
        Some((velocity, arrival))
    }

    fn fall_asleep(&mut self, now: SimTime) -> Vec<Effect> {
        debug_assert_eq!(self.state, NodeState::Safe);
        self.power = PowerMode::Asleep;
        self.window = None;
        self.reports.clear();
        vec![Effect::SleepUntil(now.after(self.sleep_interval))]
    }

    fn response(&self) -> Message {
        let predicted_arrival = match self.state {
            NodeState::Covered => Arrival::At(self.detection_time.expect("covered node has a detection time")),
            _ => match self.predicted_arrival {
                Some(Arrival::At(t)) => Arrival::At(self.estimated_at.after(t.secs())),
                _ => Arrival::Never,
            },
        };
        Message::Response {
            sender: self.id,
            sender_pos: self.pos,
            state: self.state,
            velocity: self.velocity_estimate.unwrap_or(Vec2::ZERO),
            predicted_arrival,
        }
    }
}

/// Covered/alert reports carrying a usable velocity. An alert neighbor's
/// lead is what remains of its own predicted arrival at `now`.
fn informative<'a>(reports: impl Iterator<Item = &'a NeighborReport>, now: SimTime) -> Vec<NeighborEstimate> {
    reports
        .filter(|r| r.velocity.magnitude() > 0.0)
        .filter_map(|r| {
            let lead = match (r.state, r.arrival) {
                (NodeState::Alert, Arrival::At(t)) => (t.secs() - now.secs()).max(0.0),
                _ => 0.0,
            };
            NeighborEstimate::new(r.pos, r.velocity, r.state).ok()?.with_lead(lead).ok()
        })
        .collect()
}

/// Whether a new prediction differs enough from the last broadcast one to
/// be worth announcing.
pub fn significant_change(old: Option<Arrival>, new: Arrival, epsilon: f64) -> bool {
    match (old, new) {
        (None, _) => true,
        (Some(Arrival::Never), Arrival::Never) => false,
        (Some(Arrival::Never), _) | (Some(_), Arrival::Never) => true,
        (Some(Arrival::At(o)), Arrival::At(n)) => {
            let (o, n) = (o.secs(), n.secs());
            if o > 0.0 {
                (n - o).abs() / o > epsilon
            } else {
                n != o
            }
        }
    }
}
