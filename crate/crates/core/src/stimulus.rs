//! Ground-truth diffusion fronts.
//!
//! Both models grow radially from a single source: the covered region at
//! time `t` is every point within `r0 + v(theta) * t` of the source, where
//! `theta` is the point's bearing from the source. Coverage never shrinks.

use std::f64::consts::TAU;

use crate::error::ConfigError;
use crate::geom::{Arrival, SimTime, Vec2};

#[derive(Debug, Clone, PartialEq)]
pub enum StimulusModel {
    Isotropic {
        source: Vec2,
        r0: f64,
        speed: f64,
    },
    /// `speeds[k]` is the front speed at bearing `k * 2pi / speeds.len()`;
    /// linear in between.
    Anisotropic {
        source: Vec2,
        r0: f64,
        speeds: Vec<f64>,
    },
}

impl StimulusModel {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let (source, r0) = self.origin();
        if !source.is_finite() {
            return Err(ConfigError::Stimulus("source must be finite".into()));
        }
        if !(r0.is_finite() && r0 >= 0.0) {
            return Err(ConfigError::Stimulus(format!("r0 must be finite and >= 0, got {r0}")));
        }
        match self {
            StimulusModel::Isotropic { speed, .. } => check_speed(*speed),
            StimulusModel::Anisotropic { speeds, .. } => {
                if speeds.len() < 4 {
                    return Err(ConfigError::Stimulus(format!(
                        "anisotropic speed table needs at least 4 angles, got {}",
                        speeds.len()
                    )));
                }
                speeds.iter().try_for_each(|s| check_speed(*s))
            }
        }
    }

    fn origin(&self) -> (Vec2, f64) {
        match self {
            StimulusModel::Isotropic { source, r0, .. } | StimulusModel::Anisotropic { source, r0, .. } => {
                (*source, *r0)
            }
        }
    }

    pub fn source(&self) -> Vec2 {
        self.origin().0
    }

    /// Front speed along the ray from the source through `p`.
    pub fn speed_toward(&self, p: Vec2) -> f64 {
        match self {
            StimulusModel::Isotropic { speed, .. } => *speed,
            StimulusModel::Anisotropic { source, speeds, .. } => {
                let bearing = (p - *source).angle().rem_euclid(TAU);
                interpolate(speeds, bearing)
            }
        }
    }

    pub fn covered(&self, p: Vec2, t: SimTime) -> bool {
        let (source, r0) = self.origin();
        let dist = p.distance(source);
        dist == 0.0 || dist <= r0 + self.speed_toward(p) * t.secs()
    }

    /// Earliest time at which `p` is covered.
    pub fn first_arrival(&self, p: Vec2) -> Arrival {
        let (source, r0) = self.origin();
        let dist = p.distance(source);
        if dist <= r0 {
            return Arrival::At(SimTime::ZERO);
        }
        let speed = self.speed_toward(p);
        if speed > 0.0 {
            Arrival::At(SimTime::from_secs((dist - r0) / speed))
        } else {
            Arrival::Never
        }
    }
}

fn check_speed(s: f64) -> Result<(), ConfigError> {
    if s.is_finite() && s >= 0.0 {
        Ok(())
    } else {
        Err(ConfigError::Stimulus(format!("speeds must be finite and >= 0, got {s}")))
    }
}

fn interpolate(table: &[f64], bearing: f64) -> f64 {
    let k = table.len();
    let step = TAU / k as f64;
    let pos = bearing / step;
    let lo = (pos.floor() as usize) % k;
    let hi = (lo + 1) % k;
    let frac = (pos - pos.floor()).clamp(0.0, 1.0);
    table[lo] + (table[hi] - table[lo]) * frac
}
