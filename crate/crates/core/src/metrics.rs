//! Detection-delay and energy metrics, and the CSV result formats.

use std::io::Write;

use thiserror::Error;

use crate::sim::{NodeResult, RunResult};

pub const NODE_CSV_HEADER: [&str; 13] = [
    "node_id",
    "x",
    "y",
    "first_arrival_s",
    "detection_s",
    "delay_s",
    "awake_j",
    "sleep_j",
    "tx_j",
    "rx_j",
    "total_j",
    "msgs_tx",
    "msgs_rx",
];

pub const SUMMARY_CSV_HEADER: [&str; 6] =
    ["scenario", "strategy", "alert_threshold_s", "max_sleep_s", "avg_delay_s", "avg_energy_j"];

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("no node was reached by the stimulus within the horizon")]
    NoEvents,
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Delay of one node, if the stimulus reached it within the horizon.
/// A reached node that never detected it is charged up to the horizon.
pub fn node_delay(node: &NodeResult, horizon: f64) -> Option<f64> {
    let arrival = node.first_arrival.finite()?.secs();
    if arrival > horizon {
        return None;
    }
    Some(match node.detection_time {
        Some(d) => d.secs() - arrival,
        None => horizon - arrival,
    })
}

/// Reached nodes that never detected the stimulus.
pub fn missed_detections(result: &RunResult) -> Vec<u32> {
    result
        .nodes
        .iter()
        .filter(|n| node_delay(n, result.horizon).is_some() && n.detection_time.is_none())
        .map(|n| n.id.0)
        .collect()
}

pub fn avg_detection_delay(result: &RunResult) -> Result<f64, MetricsError> {
    let delays: Vec<f64> = result.nodes.iter().filter_map(|n| node_delay(n, result.horizon)).collect();
    if delays.is_empty() {
        return Err(MetricsError::NoEvents);
    }
    Ok(delays.iter().sum::<f64>() / delays.len() as f64)
}

/// Mean per-node energy in joules, over every node.
pub fn avg_energy(result: &RunResult) -> f64 {
    if result.nodes.is_empty() {
        return 0.0;
    }
    result.nodes.iter().map(|n| n.ledger.total()).sum::<f64>() / result.nodes.len() as f64
}

/// One row of the summary CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub scenario: String,
    pub strategy: String,
    pub alert_threshold_s: Option<f64>,
    pub max_sleep_s: Option<f64>,
    /// `None` when the stimulus reached no node.
    pub avg_delay_s: Option<f64>,
    pub avg_energy_j: f64,
}

impl Summary {
    pub fn of(result: &RunResult) -> Self {
        let params = result.strategy.params();
        Summary {
            scenario: result.scenario.clone(),
            strategy: result.strategy.label().to_string(),
            alert_threshold_s: params.map(|p| p.alert_threshold),
            max_sleep_s: params.map(|p| p.max_sleep),
            avg_delay_s: avg_detection_delay(result).ok(),
            avg_energy_j: avg_energy(result),
        }
    }

    fn record(&self) -> [String; 6] {
        [
            self.scenario.clone(),
            self.strategy.clone(),
            opt(self.alert_threshold_s),
            opt(self.max_sleep_s),
            opt(self.avg_delay_s),
            self.avg_energy_j.to_string(),
        ]
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_node_csv<W: Write>(result: &RunResult, out: W) -> Result<(), MetricsError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(NODE_CSV_HEADER)?;
    for n in &result.nodes {
        let l = &n.ledger;
        w.write_record([
            n.id.to_string(),
            n.pos.x.to_string(),
            n.pos.y.to_string(),
            opt(n.first_arrival.finite().map(|t| t.secs())),
            opt(n.detection_time.map(|t| t.secs())),
            opt(node_delay(n, result.horizon)),
            l.awake_j.to_string(),
            l.sleep_j.to_string(),
            l.tx_j.to_string(),
            l.rx_j.to_string(),
            l.total().to_string(),
            n.msgs_tx.to_string(),
            n.msgs_rx.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_csv<'a, W: Write>(
    rows: impl IntoIterator<Item = &'a Summary>,
    out: W,
) -> Result<(), MetricsError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_CSV_HEADER)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::EnergyLedger;
    use crate::geom::{Arrival, NodeId, SimTime, Vec2};
    use crate::protocol::{NodeState, PasParams};
    use crate::sim::Strategy;

    fn node(id: u32, arrival: Option<f64>, detected: Option<f64>, ledger: EnergyLedger) -> NodeResult {
        NodeResult {
            id: NodeId(id),
            pos: Vec2::new(id as f64, 0.0),
            first_arrival: arrival.map_or(Arrival::Never, |a| Arrival::At(SimTime::new(a).unwrap())),
            detection_time: detected.map(|d| SimTime::new(d).unwrap()),
            ledger,
            occupancy: [0.0; 3],
            msgs_tx: 0,
            msgs_rx: 0,
            malformed: 0,
            sleep_interval_at_arrival: None,
            final_state: NodeState::Safe,
            final_sleep_interval: 1.0,
        }
    }

    fn result(nodes: Vec<NodeResult>, strategy: Strategy) -> RunResult {
        RunResult {
            scenario: "unit".into(),
            strategy,
            horizon: 100.0,
            seed: 0,
            nodes,
            transitions: Vec::new(),
            events_processed: 0,
            stimulus_arrivals: 0,
            trace: None,
        }
    }

    fn ledger() -> EnergyLedger {
        EnergyLedger::default()
    }

    #[test]
    fn delay_is_mean_over_reached_nodes() {
        let r = result(
            vec![
                node(0, Some(1.0), Some(1.0), ledger()),
                node(1, Some(3.0), Some(5.0), ledger()),
                node(2, Some(10.0), Some(14.0), ledger()),
                node(3, None, None, ledger()),
                node(4, Some(150.0), None, ledger()),
            ],
            Strategy::Pas(PasParams::default()),
        );
        assert_eq!(avg_detection_delay(&r).unwrap(), 2.0);
    }

    #[test]
    fn late_wake_contributes_its_gap() {
        let r = result(vec![node(0, Some(10.0), Some(12.0), ledger())], Strategy::NonSleeping);
        assert_eq!(avg_detection_delay(&r).unwrap(), 2.0);
    }

    #[test]
    fn undetected_node_is_charged_to_horizon_and_flagged() {
        let r = result(vec![node(0, Some(90.0), None, ledger())], Strategy::NonSleeping);
        assert_eq!(avg_detection_delay(&r).unwrap(), 10.0);
        assert_eq!(missed_detections(&r), vec![0]);
    }

    #[test]
    fn no_reached_nodes_is_an_error() {
        let r = result(vec![node(0, None, None, ledger())], Strategy::NonSleeping);
        assert!(matches!(avg_detection_delay(&r), Err(MetricsError::NoEvents)));
    }

    #[test]
    fn energy_is_mean_ledger_total() {
        let ns = EnergyLedger { awake_j: 4.1, ..ledger() };
        let r = result((0..30).map(|i| node(i, None, None, ns)).collect(), Strategy::NonSleeping);
        assert!((avg_energy(&r) - 4.1).abs() < 1e-12);
        let asleep = EnergyLedger { sleep_j: 1.5e-3, ..ledger() };
        let r = result(vec![node(0, None, None, asleep)], Strategy::NonSleeping);
        assert_eq!(avg_energy(&r), 1.5e-3);
        assert_eq!(asleep.tx_j + asleep.rx_j, 0.0);
    }

    #[test]
    fn csv_headers_are_exact() {
        let r = result(vec![node(0, Some(1.0), Some(2.5), ledger())], Strategy::Pas(PasParams::default()));
        let mut buf = Vec::new();
        write_node_csv(&r, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "node_id,x,y,first_arrival_s,detection_s,delay_s,awake_j,sleep_j,tx_j,rx_j,total_j,msgs_tx,msgs_rx"
        );
        assert_eq!(lines.next().unwrap(), "0,0,0,1,2.5,1.5,0,0,0,0,0,0,0");

        let mut buf = Vec::new();
        write_summary_csv([&Summary::of(&r)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "scenario,strategy,alert_threshold_s,max_sleep_s,avg_delay_s,avg_energy_j");
        assert_eq!(lines.next().unwrap(), "unit,pas,10,10,1.5,0");
    }
}
