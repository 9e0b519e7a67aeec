//! Planar geometry and simulated time primitives.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::DomainError;

/// A planar vector in meters (positions, displacements) or m/s (velocities).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// Euclidean norm.
    pub fn magnitude(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).magnitude()
    }

    /// Direction angle in radians, in `(-pi, pi]`.
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn rotate(self, theta: f64) -> Vec2 {
        let (s, c) = theta.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

/// Cosine of the included angle between `a` and `b`, clamped to `[-1, 1]`.
pub fn cos_angle(a: Vec2, b: Vec2) -> Result<f64, DomainError> {
    let denom = a.magnitude() * b.magnitude();
    if denom == 0.0 {
        return Err(DomainError::ZeroVector);
    }
    Ok((a.dot(b) / denom).clamp(-1.0, 1.0))
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    fn div(self, k: f64) -> Vec2 {
        Vec2::new(self.x / k, self.y / k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl fmt::Display for Vec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Simulated time in seconds. Always finite and non-negative.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct SimTime(f64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0.0);

    pub fn new(secs: f64) -> Result<Self, DomainError> {
        if secs.is_finite() && secs >= 0.0 {
            Ok(SimTime(secs))
        } else {
            Err(DomainError::InvalidTime(secs))
        }
    }

    /// Panics on a negative or non-finite value; for internal arithmetic
    /// whose inputs are already validated.
    pub(crate) fn from_secs(secs: f64) -> Self {
        Self::new(secs).expect("simulated time must be finite and non-negative")
    }

    pub fn secs(self) -> f64 {
        self.0
    }

    pub fn after(self, delta: f64) -> SimTime {
        SimTime::from_secs(self.0 + delta)
    }
}

impl Eq for SimTime {}

impl PartialOrd for SimTime {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SimTime {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A time that may never come: predicted arrival times and first-arrival
/// oracles. `Never` orders after every finite time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Arrival {
    At(SimTime),
    Never,
}

impl Arrival {
    /// `+inf` for `Never`.
    pub fn as_secs(self) -> f64 {
        match self {
            Arrival::At(t) => t.secs(),
            Arrival::Never => f64::INFINITY,
        }
    }

    pub fn from_secs(secs: f64) -> Result<Self, DomainError> {
        if secs == f64::INFINITY {
            Ok(Arrival::Never)
        } else {
            SimTime::new(secs).map(Arrival::At)
        }
    }

    pub fn finite(self) -> Option<SimTime> {
        match self {
            Arrival::At(t) => Some(t),
            Arrival::Never => None,
        }
    }

    pub fn is_never(self) -> bool {
        matches!(self, Arrival::Never)
    }
}

/// Dense node identifier, unique within a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}
