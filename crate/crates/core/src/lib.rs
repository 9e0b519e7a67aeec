//! Prediction-based adaptive sleeping for diffusion-stimulus monitoring in
//! wireless sensor networks, with a deterministic discrete-event simulator
//! to evaluate it.

pub mod energy;
pub mod error;
pub mod estimation;
pub mod geom;
pub mod metrics;
pub mod protocol;
pub mod scenario;
pub mod sim;
pub mod stimulus;
pub mod sweep;
