#![allow(dead_code)]

use std::path::PathBuf;

use pas_core::energy::{idle_energy, rx_energy, tx_energy, EnergyLedger, PowerMode};
use pas_core::geom::{NodeId, Vec2};
use pas_core::protocol::PasParams;
use pas_core::scenario::ScenarioFile;
use pas_core::sim::trace::parse_line;
use pas_core::sim::{Scenario, Strategy};
use pas_core::stimulus::StimulusModel;
use rand::Rng;

pub fn reference_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/reference.toml")
}

pub fn reference() -> ScenarioFile {
    ScenarioFile::load(&reference_path()).expect("reference scenario")
}

pub fn random_scenario(rng: &mut impl Rng, name: &str) -> Scenario {
    let n = rng.gen_range(2..40);
    let side = rng.gen_range(15.0..60.0);
    let mut nodes: Vec<(NodeId, Vec2)> = Vec::with_capacity(n);
    while nodes.len() < n {
        let p = Vec2::new(rng.gen_range(0.0..side), rng.gen_range(0.0..side));
        if nodes.iter().all(|(_, q)| *q != p) {
            nodes.push((NodeId(nodes.len() as u32), p));
        }
    }
    let source = Vec2::new(rng.gen_range(-5.0..side / 2.0), rng.gen_range(-5.0..side / 2.0));
    let r0 = rng.gen_range(0.0..3.0);
    let stimulus = if rng.gen_bool(0.5) {
        StimulusModel::Isotropic { source, r0, speed: rng.gen_range(0.2..3.0) }
    } else {
        let k = rng.gen_range(4..10);
        StimulusModel::Anisotropic { source, r0, speeds: (0..k).map(|_| rng.gen_range(0.0..3.0)).collect() }
    };
    let strategy = match rng.gen_range(0..3) {
        0 => Strategy::NonSleeping,
        kind => {
            let initial_sleep = rng.gen_range(0.2..3.0);
            Strategy::Pas(PasParams {
                alert_threshold: if kind == 1 { 0.0 } else { rng.gen_range(1.0..40.0) },
                sleep_increment: rng.gen_range(0.1..3.0),
                initial_sleep,
                max_sleep: initial_sleep + rng.gen_range(0.0..15.0),
                detection_timeout: rng.gen_range(1.0..40.0),
                rebroadcast_epsilon: rng.gen_range(0.01..1.0),
            })
        }
    };
    Scenario {
        name: name.to_string(),
        nodes,
        radio_range: rng.gen_range(5.0..20.0),
        stimulus,
        strategy,
        power: Default::default(),
        horizon: rng.gen_range(10.0..150.0),
        seed: rng.gen(),
    }
}

/// Rebuilds every node's ledger from the event trace alone.
pub fn ledgers_from_trace(scenario: &Scenario, trace: &str) -> Vec<EnergyLedger> {
    let power = &scenario.power;
    let start = match scenario.strategy {
        Strategy::NonSleeping => PowerMode::Awake,
        Strategy::Pas(_) => PowerMode::Asleep,
    };
    let n = scenario.nodes.len();
    let mut ledgers = vec![EnergyLedger::default(); n];
    let mut modes = vec![(start, 0.0f64); n];
    let charge = |ledger: &mut EnergyLedger, mode: PowerMode, secs: f64| {
        let j = idle_energy(mode, secs, power).unwrap();
        match mode {
            PowerMode::Awake => ledger.awake_j += j,
            PowerMode::Asleep => ledger.sleep_j += j,
        }
    };
    for line in trace.lines() {
        let l = parse_line(line).expect("well-formed trace line");
        if l.kind == "Horizon" {
            for (ledger, (mode, since)) in ledgers.iter_mut().zip(&modes) {
                charge(ledger, *mode, l.time - since);
            }
            break;
        }
        let Some(node) = l.node else { continue };
        let i = node as usize;
        for tok in &l.tokens {
            let (key, value) = tok.split_once('=').unwrap_or((tok, ""));
            match key {
                "power" => {
                    let next = if value == "Awake" { PowerMode::Awake } else { PowerMode::Asleep };
                    let (mode, since) = modes[i];
                    charge(&mut ledgers[i], mode, l.time - since);
                    if next == PowerMode::Awake {
                        ledgers[i].awake_j += power.wakeup_j();
                    }
                    modes[i] = (next, l.time);
                }
                "tx" => ledgers[i].tx_j += tx_energy(value.parse().unwrap(), power).unwrap(),
                "rx" => ledgers[i].rx_j += rx_energy(value.parse().unwrap(), power).unwrap(),
                _ => {}
            }
        }
    }
    ledgers
}
