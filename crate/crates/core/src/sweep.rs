//! Parameter sweeps with seed replication.
//!
//! Replication `k` runs with seed `base_seed + k`. Runs execute in parallel;
//! results come back ordered by `(value, rep)` regardless of scheduling.

use rayon::prelude::*;
use thiserror::Error;

use crate::error::ConfigError;
use crate::metrics::Summary;
use crate::scenario::{ScenarioFile, SweepParam};
use crate::sim::{run, RunOptions};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("sweep needs at least one value and one replication")]
    Empty,
    #[error("sweep values must be positive, finite and ascending")]
    Values,
    #[error("the non-sleeping strategy has no `{0}` to sweep")]
    NotSweepable(SweepParam),
    #[error("value {value}: {source}")]
    Config { value: f64, source: ConfigError },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRun {
    pub value: f64,
    pub rep: usize,
    pub seed: u64,
    pub summary: Summary,
}

/// Replication means for one swept value.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub summary: Summary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub param: SweepParam,
    pub runs: Vec<SweepRun>,
    pub aggregate: Vec<SweepPoint>,
}

impl SweepOutput {
    pub fn delay_series(&self) -> Vec<f64> {
        self.aggregate.iter().map(|p| p.summary.avg_delay_s.unwrap_or(f64::NAN)).collect()
    }

    pub fn energy_series(&self) -> Vec<f64> {
        self.aggregate.iter().map(|p| p.summary.avg_energy_j).collect()
    }
}

/// `file` with `param` set to `value`.
pub fn with_param(file: &ScenarioFile, param: SweepParam, value: f64) -> Result<ScenarioFile, SweepError> {
    let mut file = file.clone();
    let fields = file.strategy.fields_mut().ok_or(SweepError::NotSweepable(param))?;
    match param {
        SweepParam::MaxSleep => fields.max_sleep = Some(value),
        SweepParam::AlertThreshold => fields.alert_threshold = Some(value),
    }
    Ok(file)
}

pub fn sweep(file: &ScenarioFile, param: SweepParam, values: &[f64], reps: usize) -> Result<SweepOutput, SweepError> {
    if values.is_empty() || reps == 0 {
        return Err(SweepError::Empty);
    }
    let ascending = values.windows(2).all(|w| w[0] <= w[1]);
    if !ascending || values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(SweepError::Values);
    }

    let mut jobs = Vec::with_capacity(values.len() * reps);
    for &value in values {
        let variant = with_param(file, param, value)?;
        for rep in 0..reps {
            let seed = file.seed.wrapping_add(rep as u64);
            let scenario = variant.build_with_seed(seed).map_err(|source| SweepError::Config { value, source })?;
            jobs.push((value, rep, seed, scenario));
        }
    }

    let runs: Vec<SweepRun> = jobs
        .into_par_iter()
        .map(|(value, rep, seed, scenario)| {
            let result = run(&scenario, RunOptions::default()).expect("scenario validated at build");
            let mut summary = Summary::of(&result);
            summary.scenario = format!("{}#rep{rep}", file.name);
            SweepRun { value, rep, seed, summary }
        })
        .collect();

    let aggregate = runs
        .chunks(reps)
        .map(|chunk| {
            let delays: Vec<f64> = chunk.iter().filter_map(|r| r.summary.avg_delay_s).collect();
            let avg_delay_s = (!delays.is_empty()).then(|| delays.iter().sum::<f64>() / delays.len() as f64);
            let avg_energy_j = chunk.iter().map(|r| r.summary.avg_energy_j).sum::<f64>() / chunk.len() as f64;
            let first = &chunk[0].summary;
            SweepPoint {
                value: chunk[0].value,
                summary: Summary {
                    scenario: file.name.clone(),
                    strategy: first.strategy.clone(),
                    alert_threshold_s: first.alert_threshold_s,
                    max_sleep_s: first.max_sleep_s,
                    avg_delay_s,
                    avg_energy_j,
                },
            }
        })
        .collect();

    Ok(SweepOutput { param, runs, aggregate })
}
