//! Prints seed-mean delay and energy for the strategy comparisons and
//! parameter sweeps on a scenario file.
//!
//! cargo run --release --example trends -- scenarios/reference.toml [reps]

use pas_core::metrics::avg_energy;
use pas_core::scenario::{PasFields, ScenarioFile, StrategySpec, SweepParam};
use pas_core::sim::{run, RunOptions};
use pas_core::sweep::{sweep, with_param};

fn main() {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| "scenarios/reference.toml".into());
    let reps: usize = args.next().map_or(10, |r| r.parse().expect("reps"));
    let file = ScenarioFile::load(path.as_ref()).expect("scenario");

    let ms = sweep(&file, SweepParam::MaxSleep, &[2.0, 4.0, 6.0, 8.0, 10.0], reps).unwrap();
    println!("max_sleep   delay {:?}", ms.delay_series());
    println!("max_sleep   energy {:?}", ms.energy_series());

    let th = sweep(&file, SweepParam::AlertThreshold, &[10.0, 20.0, 30.0], reps).unwrap();
    println!("threshold   delay {:?}", th.delay_series());
    println!("threshold   energy {:?}", th.energy_series());

    let mut sas = with_param(&file, SweepParam::MaxSleep, 10.0).unwrap();
    let fields = *sas.strategy.fields_mut().unwrap();
    sas.strategy = StrategySpec::Sas(PasFields { alert_threshold: None, ..fields });
    let s = sweep(&sas, SweepParam::MaxSleep, &[10.0], reps).unwrap();
    println!("sas         delay {:?} energy {:?}", s.delay_series(), s.energy_series());

    let mut ns = file.clone();
    ns.strategy = StrategySpec::Ns;
    let mut e = 0.0;
    for k in 0..reps {
        let r = run(&ns.build_with_seed(file.seed + k as u64).unwrap(), RunOptions::default()).unwrap();
        e += avg_energy(&r);
    }
    println!("ns          energy {}", e / reps as f64);
}
