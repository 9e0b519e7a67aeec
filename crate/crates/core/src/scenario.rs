//! Scenario files.
//!
//! A scenario is a TOML document:
//!
//! ```toml
//! name = "reference"
//! radio_range = 10.0
//! horizon = 120.0
//! seed = 1
//! trace = false            # optional: also write the event trace
//!
//! [nodes]
//! generator = "uniform"    # "uniform" | "grid" | "explicit"
//! count = 30
//! region = { min = [0.0, 0.0], max = [60.0, 60.0] }
//! # seed = 7               # pins the layout; defaults to the run seed
//! # positions = [[0.0, 0.0], [5.0, 0.0]]   # explicit only
//!
//! [stimulus]
//! kind = "isotropic"       # or "anisotropic" with `speeds = [...]`
//! source = [0.0, 0.0]
//! r0 = 2.0
//! speed = 1.0
//!
//! [strategy]
//! kind = "pas"             # "ns" | "pas" | "sas"
//! alert_threshold = 10.0   # every protocol field is optional
//!
//! [power]                  # optional overrides of the Telos profile
//! sleep_uw = 15.0
//!
//! [sweep]                  # optional
//! param = "max_sleep"
//! values = [2.0, 4.0, 6.0, 8.0, 10.0]
//! reps = 5
//! ```

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use thiserror::Error;

use crate::energy::PowerProfile;
use crate::error::ConfigError;
use crate::geom::{NodeId, Vec2};
use crate::protocol::PasParams;
use crate::sim::{Scenario, Strategy};
use crate::stimulus::StimulusModel;

pub const DEFAULT_REPS: usize = 5;

#[derive(Debug, Error)]
pub enum ScenarioFileError {
    #[error("cannot read scenario: {0}")]
    Io(#[from] std::io::Error),
    #[error("scenario parse error: {0}")]
    Parse(#[from] toml::de::Error),
}

type Point = [f64; 2];

fn vec2(p: Point) -> Vec2 {
    Vec2::new(p[0], p[1])
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default = "default_name")]
    pub name: String,
    pub radio_range: f64,
    pub horizon: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub trace: bool,
    pub nodes: NodesSpec,
    pub stimulus: StimulusSpec,
    pub strategy: StrategySpec,
    #[serde(default)]
    pub power: PowerProfile,
    pub sweep: Option<SweepSpec>,
}

fn default_name() -> String {
    "scenario".to_string()
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub min: Point,
    pub max: Point,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "generator", rename_all = "lowercase", deny_unknown_fields)]
pub enum NodesSpec {
    Explicit { positions: Vec<Point> },
    Uniform { count: usize, region: Region, seed: Option<u64> },
    Grid { count: usize, region: Region },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum StimulusSpec {
    Isotropic { source: Point, r0: f64, speed: f64 },
    Anisotropic { source: Point, r0: f64, speeds: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StrategySpec {
    Ns,
    Pas(PasFields),
    /// PAS with the alert threshold pinned to zero.
    Sas(PasFields),
}

/// Protocol parameters as written; unset fields take the defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PasFields {
    pub alert_threshold: Option<f64>,
    pub sleep_increment: Option<f64>,
    pub initial_sleep: Option<f64>,
    pub max_sleep: Option<f64>,
    pub detection_timeout: Option<f64>,
    pub rebroadcast_epsilon: Option<f64>,
}

impl PasFields {
    pub fn params(&self) -> PasParams {
        let d = PasParams::default();
        PasParams {
            alert_threshold: self.alert_threshold.unwrap_or(d.alert_threshold),
            sleep_increment: self.sleep_increment.unwrap_or(d.sleep_increment),
            initial_sleep: self.initial_sleep.unwrap_or(d.initial_sleep),
            max_sleep: self.max_sleep.unwrap_or(d.max_sleep),
            detection_timeout: self.detection_timeout.unwrap_or(d.detection_timeout),
            rebroadcast_epsilon: self.rebroadcast_epsilon.unwrap_or(d.rebroadcast_epsilon),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    MaxSleep,
    AlertThreshold,
}

impl FromStr for SweepParam {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "max_sleep" => Ok(SweepParam::MaxSleep),
            "alert_threshold" => Ok(SweepParam::AlertThreshold),
            other => Err(format!("unknown sweep parameter `{other}` (expected max_sleep or alert_threshold)")),
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParam::MaxSleep => "max_sleep",
            SweepParam::AlertThreshold => "alert_threshold",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<f64>,
    #[serde(default = "default_reps")]
    pub reps: usize,
}

fn default_reps() -> usize {
    DEFAULT_REPS
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, ScenarioFileError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ScenarioFileError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// The simulation described by this file, run with `seed`.
    pub fn build_with_seed(&self, seed: u64) -> Result<Scenario, ConfigError> {
        let positions = self.nodes.positions(seed)?;
        let scenario = Scenario {
            name: self.name.clone(),
            nodes: positions.into_iter().enumerate().map(|(i, p)| (NodeId(i as u32), p)).collect(),
            radio_range: self.radio_range,
            stimulus: self.stimulus.model(),
            strategy: self.strategy.resolve()?,
            power: self.power,
            horizon: self.horizon,
            seed,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn build(&self) -> Result<Scenario, ConfigError> {
        self.build_with_seed(self.seed)
    }
}

impl NodesSpec {
    pub fn positions(&self, run_seed: u64) -> Result<Vec<Vec2>, ConfigError> {
        match self {
            NodesSpec::Explicit { positions } => Ok(positions.iter().copied().map(vec2).collect()),
            NodesSpec::Uniform { count, region, seed } => {
                check_region(region)?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(run_seed));
                // keep layout draws independent of the sleep-phase stream
                rng.set_stream(1);
                Ok((0..*count)
                    .map(|_| {
                        Vec2::new(
                            sample(&mut rng, region.min[0], region.max[0]),
                            sample(&mut rng, region.min[1], region.max[1]),
                        )
                    })
                    .collect())
            }
            NodesSpec::Grid { count, region } => {
                check_region(region)?;
                if *count == 0 {
                    return Ok(Vec::new());
                }
                let cols = (*count as f64).sqrt().ceil() as usize;
                let rows = count.div_ceil(cols);
                let dx = (region.max[0] - region.min[0]) / cols as f64;
                let dy = (region.max[1] - region.min[1]) / rows as f64;
                Ok((0..*count)
                    .map(|i| {
                        let (r, c) = (i / cols, i % cols);
                        Vec2::new(region.min[0] + (c as f64 + 0.5) * dx, region.min[1] + (r as f64 + 0.5) * dy)
                    })
                    .collect())
            }
        }
    }
}

fn sample(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..hi)
    }
}

fn check_region(region: &Region) -> Result<(), ConfigError> {
    let ok = region.min.iter().chain(&region.max).all(|v| v.is_finite())
        && region.min[0] <= region.max[0]
        && region.min[1] <= region.max[1];
    if ok {
        Ok(())
    } else {
        Err(ConfigError::Nodes(format!("bad region {:?}..{:?}", region.min, region.max)))
    }
}

impl StimulusSpec {
    pub fn model(&self) -> StimulusModel {
        match self {
            StimulusSpec::Isotropic { source, r0, speed } => {
                StimulusModel::Isotropic { source: vec2(*source), r0: *r0, speed: *speed }
            }
            StimulusSpec::Anisotropic { source, r0, speeds } => {
                StimulusModel::Anisotropic { source: vec2(*source), r0: *r0, speeds: speeds.clone() }
            }
        }
    }
}

impl StrategySpec {
    pub fn resolve(&self) -> Result<Strategy, ConfigError> {
        match self {
            StrategySpec::Ns => Ok(Strategy::NonSleeping),
            StrategySpec::Pas(f) => Ok(Strategy::Pas(f.params())),
            StrategySpec::Sas(f) => match f.alert_threshold {
                Some(t) if t != 0.0 => Err(ConfigError::Param {
                    field: "alert_threshold",
                    reason: "sas fixes the alert threshold at 0".into(),
                }),
                _ => Ok(Strategy::Pas(PasParams { alert_threshold: 0.0, ..f.params() })),
            },
        }
    }

    pub fn fields_mut(&mut self) -> Option<&mut PasFields> {
        match self {
            StrategySpec::Ns => None,
            StrategySpec::Pas(f) | StrategySpec::Sas(f) => Some(f),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const REFERENCE: &str = r#"
name = "ref"
radio_range = 10.0
horizon = 120.0
seed = 3

[nodes]
generator = "uniform"
count = 30
region = { min = [0.0, 0.0], max = [60.0, 60.0] }

[stimulus]
kind = "isotropic"
source = [0.0, 0.0]
r0 = 2.0
speed = 1.0

[strategy]
kind = "pas"
max_sleep = 6.0
"#;

    #[test]
    fn parses_and_fills_defaults() {
        let f = ScenarioFile::parse(REFERENCE).unwrap();
        let s = f.build().unwrap();
        assert_eq!(s.nodes.len(), 30);
        assert_eq!(s.seed, 3);
        assert_eq!(s.power, PowerProfile::default());
        match s.strategy {
            Strategy::Pas(p) => {
                assert_eq!(p.max_sleep, 6.0);
                assert_eq!(p.alert_threshold, 10.0);
                assert_eq!(p.rebroadcast_epsilon, 0.10);
            }
            other => panic!("unexpected {other:?}"),
        }
        for (_, p) in &s.nodes {
            assert!((0.0..60.0).contains(&p.x) && (0.0..60.0).contains(&p.y));
        }
    }

    #[test]
    fn layout_follows_run_seed_unless_pinned() {
        let f = ScenarioFile::parse(REFERENCE).unwrap();
        assert_ne!(f.build_with_seed(1).unwrap().nodes, f.build_with_seed(2).unwrap().nodes);
        assert_eq!(f.build_with_seed(1).unwrap().nodes, f.build_with_seed(1).unwrap().nodes);
        let pinned = ScenarioFile::parse(&REFERENCE.replace("count = 30", "count = 30\nseed = 9")).unwrap();
        assert_eq!(pinned.build_with_seed(1).unwrap().nodes, pinned.build_with_seed(2).unwrap().nodes);
    }

    #[test]
    fn missing_stimulus_is_a_parse_error() {
        let text = REFERENCE.split("[stimulus]").next().unwrap().to_string() + "[strategy]\nkind = \"ns\"\n";
        let err = ScenarioFile::parse(&text).unwrap_err();
        assert!(err.to_string().contains("stimulus"), "{err}");
    }

    #[test]
    fn unknown_fields_are_rejected_with_location() {
        let err = ScenarioFile::parse(&REFERENCE.replace("max_sleep = 6.0", "max_slep = 6.0")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("max_slep"), "{msg}");
        assert!(msg.contains("line"), "{msg}");
    }

    #[test]
    fn sas_pins_threshold_to_zero() {
        let f = ScenarioFile::parse(&REFERENCE.replace("kind = \"pas\"", "kind = \"sas\"")).unwrap();
        match f.build().unwrap().strategy {
            Strategy::Pas(p) => assert_eq!(p.alert_threshold, 0.0),
            other => panic!("unexpected {other:?}"),
        }
        let bad = REFERENCE.replace("kind = \"pas\"", "kind = \"sas\"\nalert_threshold = 5.0");
        assert!(ScenarioFile::parse(&bad).unwrap().build().is_err());
    }

    #[test]
    fn grid_and_explicit_layouts() {
        let grid = NodesSpec::Grid { count: 4, region: Region { min: [0.0, 0.0], max: [20.0, 20.0] } };
        let pts = grid.positions(0).unwrap();
        assert_eq!(pts, vec![Vec2::new(5.0, 5.0), Vec2::new(15.0, 5.0), Vec2::new(5.0, 15.0), Vec2::new(15.0, 15.0)]);
        let explicit = NodesSpec::Explicit { positions: vec![[1.0, 2.0]] };
        assert_eq!(explicit.positions(0).unwrap(), vec![Vec2::new(1.0, 2.0)]);
    }

    #[test]
    fn invalid_values_are_config_errors() {
        let f = ScenarioFile::parse(&REFERENCE.replace("radio_range = 10.0", "radio_range = -1.0")).unwrap();
        assert_eq!(f.build(), Err(ConfigError::RadioRange(-1.0)));
        let f = ScenarioFile::parse(&REFERENCE.replace("max_sleep = 6.0", "max_sleep = 0.5")).unwrap();
        assert!(matches!(f.build(), Err(ConfigError::Param { field: "initial_sleep", .. })));
        let dup = REFERENCE.replace(
            "generator = \"uniform\"\ncount = 30\nregion = { min = [0.0, 0.0], max = [60.0, 60.0] }",
            "generator = \"explicit\"\npositions = [[1.0, 1.0], [1.0, 1.0]]",
        );
        assert_eq!(ScenarioFile::parse(&dup).unwrap().build(), Err(ConfigError::DuplicatePosition(0, 1)));
    }

    #[test]
    fn sweep_section_and_param_names() {
        let text = format!("{REFERENCE}\n[sweep]\nparam = \"alert_threshold\"\nvalues = [10.0, 20.0]\n");
        let f = ScenarioFile::parse(&text).unwrap();
        let sweep = f.sweep.unwrap();
        assert_eq!(sweep.param, SweepParam::AlertThreshold);
        assert_eq!(sweep.reps, DEFAULT_REPS);
        assert_eq!("max_sleep".parse::<SweepParam>().unwrap(), SweepParam::MaxSleep);
        assert!("speed".parse::<SweepParam>().is_err());
    }
}
