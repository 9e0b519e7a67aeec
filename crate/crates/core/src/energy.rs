//! Node energy model based on the Telos mote power figures.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PowerMode {
    Awake,
    Asleep,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnergyError {
    #[error("negative duration {0}")]
    NegativeDuration(f64),
    #[error("frames must carry at least one byte")]
    EmptyFrame,
}

/// Power draw figures. Defaults are the Telos values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerProfile {
    pub mcu_active_mw: f64,
    pub sleep_uw: f64,
    pub receive_mw: f64,
    pub transmit_mw: f64,
    pub data_rate_kbps: f64,
    /// Draw of an awake node: MCU plus radio listening.
    pub total_active_mw: f64,
    /// Charged once per sleep-to-awake transition. Zero unless overridden.
    pub wakeup_uj: f64,
}

impl Default for PowerProfile {
    fn default() -> Self {
        Self {
            mcu_active_mw: 3.0,
            sleep_uw: 15.0,
            receive_mw: 38.0,
            transmit_mw: 35.0,
            data_rate_kbps: 250.0,
            total_active_mw: 41.0,
            wakeup_uj: 0.0,
        }
    }
}

impl PowerProfile {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let fields: [(&'static str, f64); 7] = [
            ("mcu_active_mw", self.mcu_active_mw),
            ("sleep_uw", self.sleep_uw),
            ("receive_mw", self.receive_mw),
            ("transmit_mw", self.transmit_mw),
            ("data_rate_kbps", self.data_rate_kbps),
            ("total_active_mw", self.total_active_mw),
            ("wakeup_uj", self.wakeup_uj),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ConfigError::Power(name));
            }
        }
        if self.data_rate_kbps == 0.0 {
            return Err(ConfigError::Power("data_rate_kbps"));
        }
        Ok(())
    }

    /// Seconds on air for a frame of `bytes` bytes.
    pub fn airtime(&self, bytes: usize) -> f64 {
        (8 * bytes) as f64 / (self.data_rate_kbps * 1000.0)
    }

    pub fn wakeup_j(&self) -> f64 {
        self.wakeup_uj / 1e6
    }
}

/// Joules spent idling in `mode` for `duration` seconds.
pub fn idle_energy(mode: PowerMode, duration: f64, profile: &PowerProfile) -> Result<f64, EnergyError> {
    if duration < 0.0 || duration.is_nan() {
        return Err(EnergyError::NegativeDuration(duration));
    }
    let watts = match mode {
        PowerMode::Awake => profile.total_active_mw / 1000.0,
        PowerMode::Asleep => profile.sleep_uw / 1e6,
    };
    Ok(watts * duration)
}

pub fn tx_energy(bytes: usize, profile: &PowerProfile) -> Result<f64, EnergyError> {
    frame_energy(bytes, profile.transmit_mw, profile)
}

pub fn rx_energy(bytes: usize, profile: &PowerProfile) -> Result<f64, EnergyError> {
    frame_energy(bytes, profile.receive_mw, profile)
}

fn frame_energy(bytes: usize, mw: f64, profile: &PowerProfile) -> Result<f64, EnergyError> {
    if bytes == 0 {
        return Err(EnergyError::EmptyFrame);
    }
    Ok(profile.airtime(bytes) * (mw / 1000.0))
}

/// Per-node energy accumulators, in joules.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct EnergyLedger {
    pub awake_j: f64,
    pub sleep_j: f64,
    pub tx_j: f64,
    pub rx_j: f64,
}

impl EnergyLedger {
    pub fn total(&self) -> f64 {
        self.awake_j + self.sleep_j + self.tx_j + self.rx_j
    }

    pub fn charge_idle(&mut self, mode: PowerMode, joules: f64) {
        match mode {
            PowerMode::Awake => self.awake_j += joules,
            PowerMode::Asleep => self.sleep_j += joules,
        }
    }
}
