//! KPI computation and report emission.
//!
//! `episodes.csv` has one row per episode and direction, columns in this order:
//! `seed, delta_dapp, strategy, intent_based, direction, pdr, throughput_bps,
//! latency_ms, jitter_ms, prb_usage_pct, decision_time_us, candidate_set_mean,
//! iss_mean, f0_mean, f1_mean, f2_mean`. Undefined means are empty cells.

pub mod report;

use serde::{Deserialize, Serialize};

pub use report::{
    read_episodes_csv, summarize, write_episodes_csv, write_messages_csv, write_summary_json, DeltaSummary, EpisodeKey,
    GroupSummary, Summary, KPI_NAMES,
};

use crate::config::Strategy;
use crate::error::{Error, Result};
use crate::Direction;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpiRecord {
    pub seed: u64,
    pub delta_dapp: u32,
    pub strategy: Strategy,
    pub intent_based: bool,
    pub direction: Direction,
    pub pdr: f64,
    pub throughput_bps: f64,
    pub latency_ms: Option<f64>,
    pub jitter_ms: Option<f64>,
    pub prb_usage_pct: f64,
    pub decision_time_us: Option<f64>,
    pub candidate_set_mean: Option<f64>,
    pub iss_mean: Option<f64>,
    pub f0_mean: Option<f64>,
    pub f1_mean: Option<f64>,
    pub f2_mean: Option<f64>,
}

/// Delivered over sent; 1 when nothing was sent.
pub fn pdr(sent: u64, delivered: u64) -> Result<f64> {
    if delivered > sent {
        return Err(Error::Invariant(format!("{delivered} packets delivered out of {sent} sent")));
    }
    Ok(if sent == 0 { 1.0 } else { delivered as f64 / sent as f64 })
}

/// Mean latency and mean absolute latency step between consecutive
/// deliveries. `flows` holds each flow's latencies in delivery order.
pub fn latency_and_jitter(flows: &[Vec<f64>]) -> (Option<f64>, Option<f64>) {
    let all: Vec<f64> = flows.iter().flatten().copied().collect();
    let steps: Vec<f64> = flows.iter().flat_map(|f| f.windows(2).map(|w| (w[1] - w[0]).abs())).collect();
    (mean(&all), mean(&steps))
}

/// Percentage of unit-TTIs that carried a transmission.
pub fn prb_usage(used_unit_ttis: u64, capacity: u32, ttis: u64) -> f64 {
    if capacity == 0 || ttis == 0 {
        return 0.0;
    }
    100.0 * used_unit_ttis as f64 / (capacity as f64 * ttis as f64)
}

pub fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pdr_examples() {
        assert_eq!(pdr(100, 97).unwrap(), 0.97);
        assert_eq!(pdr(0, 0).unwrap(), 1.0);
        assert!(matches!(pdr(1, 2), Err(Error::Invariant(_))));
    }

    #[test]
    fn latency_jitter_examples() {
        assert_eq!(latency_and_jitter(&[vec![5.0]]), (Some(5.0), None));
        let (l, j) = latency_and_jitter(&[vec![5.0, 7.0, 5.0]]);
        assert!((l.unwrap() - 17.0 / 3.0).abs() < 1e-12);
        assert_eq!(j, Some(2.0));
        assert_eq!(latency_and_jitter(&[]), (None, None));
        assert_eq!(latency_and_jitter(&[vec![], vec![]]), (None, None));
    }

    #[test]
    fn usage_examples() {
        assert_eq!(prb_usage(0, 100, 1000), 0.0);
        assert_eq!(prb_usage(100_000, 100, 1000), 100.0);
        assert_eq!(prb_usage(12_500, 25, 1000), 50.0);
    }
}
