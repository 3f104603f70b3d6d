use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use super::{mean, KpiRecord};
use crate::config::Strategy;
use crate::control::LedgerEntry;
use crate::error::{Error, Result};
use crate::Direction;

/// KPI names in report order.
pub const KPI_NAMES: [&str; 11] = [
    "pdr",
    "throughput_bps",
    "latency_ms",
    "jitter_ms",
    "prb_usage_pct",
    "decision_time_us",
    "candidate_set_mean",
    "iss_mean",
    "f0_mean",
    "f1_mean",
    "f2_mean",
];

fn kpi_values(r: &KpiRecord) -> [Option<f64>; 11] {
    [
        Some(r.pdr),
        Some(r.throughput_bps),
        r.latency_ms,
        r.jitter_ms,
        Some(r.prb_usage_pct),
        r.decision_time_us,
        r.candidate_set_mean,
        r.iss_mean,
        r.f0_mean,
        r.f1_mean,
        r.f2_mean,
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    pub strategy: Strategy,
    pub intent_based: bool,
    pub delta_dapp: u32,
    pub direction: Direction,
    pub episodes: usize,
    /// Mean of each KPI over the group's rows where it is defined.
    pub means: BTreeMap<String, Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaSummary {
    pub strategy: Strategy,
    pub delta_dapp: u32,
    pub direction: Direction,
    /// Intent-based mean minus intent-agnostic mean, per KPI.
    pub ib_minus_agnostic: BTreeMap<String, Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub embedding_provider: String,
    pub groups: Vec<GroupSummary>,
    pub deltas: Vec<DeltaSummary>,
}

/// Per-(strategy, intent_based, delta, direction) means and the IB-vs-agnostic deltas.
pub fn summarize(records: &[KpiRecord], embedding_provider: &str) -> Summary {
    let mut buckets: BTreeMap<(Strategy, bool, u32, Direction), Vec<&KpiRecord>> = BTreeMap::new();
    for r in records {
        buckets.entry((r.strategy, r.intent_based, r.delta_dapp, r.direction)).or_default().push(r);
    }
    let groups: Vec<GroupSummary> = buckets
        .iter()
        .map(|(&(strategy, intent_based, delta_dapp, direction), rows)| {
            let means = KPI_NAMES
                .iter()
                .enumerate()
                .map(|(k, name)| {
                    let vals: Vec<f64> = rows.iter().filter_map(|r| kpi_values(r)[k]).collect();
                    (name.to_string(), mean(&vals))
                })
                .collect();
            GroupSummary { strategy, intent_based, delta_dapp, direction, episodes: rows.len(), means }
        })
        .collect();
    let find = |s, ib, d, dir| {
        groups.iter().find(|g| g.strategy == s && g.intent_based == ib && g.delta_dapp == d && g.direction == dir)
    };
    let deltas = groups
        .iter()
        .filter(|g| g.intent_based)
        .filter_map(|ib| {
            let ag = find(ib.strategy, false, ib.delta_dapp, ib.direction)?;
            let diff = KPI_NAMES
                .iter()
                .map(|n| {
                    let d = match (ib.means[*n], ag.means[*n]) {
                        (Some(a), Some(b)) => Some(a - b),
                        _ => None,
                    };
                    (n.to_string(), d)
                })
                .collect();
            Some(DeltaSummary {
                strategy: ib.strategy,
                delta_dapp: ib.delta_dapp,
                direction: ib.direction,
                ib_minus_agnostic: diff,
            })
        })
        .collect();
    Summary { embedding_provider: embedding_provider.to_string(), groups, deltas }
}

pub fn write_episodes_csv(path: &Path, records: &[KpiRecord]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record([
        "seed",
        "delta_dapp",
        "strategy",
        "intent_based",
        "direction",
        "pdr",
        "throughput_bps",
        "latency_ms",
        "jitter_ms",
        "prb_usage_pct",
        "decision_time_us",
        "candidate_set_mean",
        "iss_mean",
        "f0_mean",
        "f1_mean",
        "f2_mean",
    ])?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_episodes_csv(path: &Path) -> Result<Vec<KpiRecord>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let rows = rdr.deserialize().collect::<std::result::Result<Vec<KpiRecord>, _>>()?;
    Ok(rows)
}

pub fn write_summary_json(path: &Path, summary: &Summary) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    serde_json::to_writer_pretty(&mut w, summary)?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

/// Tag that identifies the episode a ledger belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpisodeKey {
    pub seed: u64,
    pub delta_dapp: u32,
    pub strategy: Strategy,
    pub intent_based: bool,
}

pub fn write_messages_csv<'a>(path: &Path, ledgers: impl IntoIterator<Item = (EpisodeKey, &'a [LedgerEntry])>) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(f));
    w.write_record([
        "seed",
        "delta_dapp",
        "strategy",
        "intent_based",
        "tti",
        "service_model",
        "msg_type",
        "direction",
        "payload_fields",
    ])?;
    for (key, entries) in ledgers {
        for e in entries {
            w.write_record([
                key.seed.to_string().as_str(),
                &key.delta_dapp.to_string(),
                key.strategy.as_str(),
                if key.intent_based { "true" } else { "false" },
                &e.tti.to_string(),
                e.service_model.as_str(),
                e.msg_type.as_str(),
                e.direction.as_str(),
                &e.payload_fields.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(seed: u64, ib: bool, iss: f64) -> KpiRecord {
        KpiRecord {
            seed,
            delta_dapp: 1,
            strategy: Strategy::Cqi,
            intent_based: ib,
            direction: Direction::Ul,
            pdr: 1.0,
            throughput_bps: 1000.0,
            latency_ms: Some(2.0),
            jitter_ms: None,
            prb_usage_pct: 10.0,
            decision_time_us: None,
            candidate_set_mean: Some(4.0),
            iss_mean: Some(iss),
            f0_mean: Some(1.0),
            f1_mean: Some(1.0),
            f2_mean: Some(1.0),
        }
    }

    #[test]
    fn csv_round_trip_and_summary() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("episodes.csv");
        let rows = vec![rec(1, false, 0.2), rec(2, false, 0.4), rec(1, true, 0.5), rec(2, true, 0.7)];
        write_episodes_csv(&path, &rows).unwrap();
        let back = read_episodes_csv(&path).unwrap();
        assert_eq!(back, rows);
        let s = summarize(&back, "x");
        assert_eq!(s.groups.len(), 2);
        assert!((s.groups[0].means["iss_mean"].unwrap() - 0.3).abs() < 1e-12);
        assert_eq!(s.groups[0].means["jitter_ms"], None);
        assert!((s.deltas[0].ib_minus_agnostic["iss_mean"].unwrap() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn empty_batch() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("episodes.csv");
        write_episodes_csv(&path, &[]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with("seed,delta_dapp,strategy,"));
        let s = summarize(&[], "x");
        assert!(s.groups.is_empty() && s.deltas.is_empty());
    }
}
