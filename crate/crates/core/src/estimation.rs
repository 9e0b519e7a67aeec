//! Front velocity and arrival-time estimation from one-hop neighbor reports.
//!
//! Three estimators:
//! - [`actual_velocity`]: a freshly covered node averages `IX / t_I` over
//!   covered neighbors that detected the stimulus before it did.
//! - [`expected_velocity`]: an uncovered node averages the velocities its
//!   covered/alert neighbors reported.
//! - [`expected_arrival_time`]: the minimum over neighbors of the distance
//!   from the neighbor to this node projected on the neighbor's velocity,
//!   divided by that neighbor's speed.
//!
//! `IX` is always the displacement from neighbor `I` to the estimating node
//! `X`, so velocities point away from the covered region.

use thiserror::Error;

use crate::geom::{cos_angle, Arrival, SimTime, Vec2};
use crate::protocol::NodeState;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimationError {
    #[error("no covered neighbors")]
    NoCoveredNeighbors,
    #[error("no informative neighbors")]
    NoInformativeNeighbors,
    #[error("invalid observation: elapsed time {0} must be positive")]
    InvalidObservation(f64),
    #[error("neighbor in state {0:?} cannot contribute an estimate")]
    IneligibleState(NodeState),
}

/// A covered neighbor `I` and how much earlier it detected the stimulus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoveredObservation {
    pub neighbor_pos: Vec2,
    /// Detection time of the estimating node minus that of the neighbor.
    pub elapsed: SimTime,
}

/// A velocity reported by a covered or alert neighbor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborEstimate {
    pub neighbor_pos: Vec2,
    pub velocity: Vec2,
    pub state: NodeState,
    /// Seconds until the front reaches the neighbor itself; zero once covered.
    pub lead: f64,
}

impl NeighborEstimate {
    pub fn new(neighbor_pos: Vec2, velocity: Vec2, state: NodeState) -> Result<Self, EstimationError> {
        match state {
            NodeState::Covered | NodeState::Alert => Ok(Self { neighbor_pos, velocity, state, lead: 0.0 }),
            NodeState::Safe => Err(EstimationError::IneligibleState(state)),
        }
    }

    pub fn with_lead(self, lead: f64) -> Result<Self, EstimationError> {
        if !(lead.is_finite() && lead >= 0.0) {
            return Err(EstimationError::InvalidObservation(lead));
        }
        Ok(Self { lead, ..self })
    }
}

pub fn actual_velocity(x_pos: Vec2, observations: &[CoveredObservation]) -> Result<Vec2, EstimationError> {
    if observations.is_empty() {
        return Err(EstimationError::NoCoveredNeighbors);
    }
    let mut sum = Vec2::ZERO;
    for obs in observations {
        let elapsed = obs.elapsed.secs();
        if elapsed <= 0.0 {
            return Err(EstimationError::InvalidObservation(elapsed));
        }
        sum = sum + (x_pos - obs.neighbor_pos) / elapsed;
    }
    Ok(sum / observations.len() as f64)
}

pub fn expected_velocity(estimates: &[NeighborEstimate]) -> Result<Vec2, EstimationError> {
    if estimates.is_empty() {
        return Err(EstimationError::NoInformativeNeighbors);
    }
    let sum = estimates.iter().fold(Vec2::ZERO, |acc, e| acc + e.velocity);
    Ok(sum / estimates.len() as f64)
}

/// Seconds from now until the front is expected at `x_pos`.
///
/// Each neighbor contributes its own lead plus the time the front needs to
/// travel from it to `x_pos` along its velocity.
///
/// Neighbors with zero speed, or whose velocity does not point toward
/// `x_pos` (`cos <= 0`), are skipped. If all are skipped the result is
/// [`Arrival::Never`].
pub fn expected_arrival_time(x_pos: Vec2, estimates: &[NeighborEstimate]) -> Result<Arrival, EstimationError> {
    if estimates.is_empty() {
        return Err(EstimationError::NoInformativeNeighbors);
    }
    let mut best = f64::INFINITY;
    for e in estimates {
        let speed = e.velocity.magnitude();
        let ix = x_pos - e.neighbor_pos;
        let cos = match cos_angle(e.velocity, ix) {
            Ok(c) if speed > 0.0 && c > 0.0 => c,
            // zero speed, receding front, or X sitting on the neighbor
            _ => continue,
        };
        let t = e.lead + ix.magnitude() * cos / speed;
        if t < best {
            best = t;
        }
    }
    Ok(if best.is_finite() { Arrival::At(SimTime::from_secs(best)) } else { Arrival::Never })
}
