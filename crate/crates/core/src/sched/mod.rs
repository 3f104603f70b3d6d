//! The dApp scheduler: demand estimation, per-strategy utilities, intent
//! admission, density-greedy knapsack selection and allocation maps.

pub mod alloc;
pub mod knapsack;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use alloc::{build_allocation, AllocationMap, Grant};
pub use knapsack::{
    admit_candidates, brute_force_optimum, cyclic_order, density_order, greedy_select, round_robin_select,
    serve_in_order, SchedulingItem, Selection,
};

use crate::config::Strategy;
use crate::radio::bits_per_alloc;
use crate::Direction;

/// What the dApp knows about one UE at a decision boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UeState {
    pub rnti: u16,
    pub cqi: u8,
    pub qci: u8,
    pub buffer_bytes: u64,
    /// Highest criticality among queued packets, 0 when the buffer is empty.
    pub max_criticality: f64,
    pub relevant: bool,
    pub inst_rate_bps: f64,
    pub hist_rate_bps: f64,
}

/// Units needed to drain the buffer in one TTI, clamped to `b_max`.
/// `None` when the UE has nothing to send or is out of range.
pub fn estimate_demand(ue: &UeState, unit_prbs: u32, b_max: u32) -> Option<u32> {
    if ue.buffer_bytes == 0 {
        return None;
    }
    let per_unit = bits_per_alloc(ue.cqi, unit_prbs).ok()?;
    if per_unit == 0 {
        return None;
    }
    let b = (ue.buffer_bytes * 8).div_ceil(per_unit);
    Some(b.min(b_max.max(1) as u64) as u32)
}

/// Strategy utility. Round robin ignores utilities and gets a constant 1.
pub fn utility(strategy: Strategy, ue: &UeState, buffer_ref_bytes: f64) -> f64 {
    match strategy {
        Strategy::Rr => 1.0,
        Strategy::Cqi => ue.cqi as f64 / 15.0,
        Strategy::Buffer => (ue.buffer_bytes as f64 / buffer_ref_bytes).min(1.0),
        Strategy::Criticality => ue.max_criticality,
        Strategy::Pf => ue.inst_rate_bps / ue.hist_rate_bps,
    }
}

/// Per-UE exponentially weighted served rate for proportional fairness.
#[derive(Debug, Clone)]
pub struct PfTracker {
    hist_bps: Vec<f64>,
    horizon_ttis: f64,
}

impl PfTracker {
    pub fn new(n_ues: usize, init_bps: f64, horizon_ttis: f64) -> Self {
        Self { hist_bps: vec![init_bps; n_ues], horizon_ttis }
    }

    pub fn hist(&self, rnti: u16) -> f64 {
        self.hist_bps[rnti as usize]
    }

    /// Fold one TTI of service (`bits` sent in 1 ms) into every UE's average.
    pub fn update(&mut self, served_bits: &[u64]) {
        let w = 1.0 / self.horizon_ttis;
        for (h, &bits) in self.hist_bps.iter_mut().zip(served_bits) {
            *h = (1.0 - w) * *h + w * bits as f64 * 1000.0;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub alloc: AllocationMap,
    pub candidates: usize,
    pub decision_time_us: Option<f64>,
}

/// One direction's dApp: strategy, intent switch and round-robin cursor.
#[derive(Debug, Clone)]
pub struct DappScheduler {
    pub direction: Direction,
    pub intent_based: bool,
    pub unit_prbs: u32,
    pub buffer_ref_bytes: f64,
    pub measure_time: bool,
    n_ues: u16,
    cursor: u16,
}

impl DappScheduler {
    pub fn new(
        direction: Direction,
        intent_based: bool,
        n_ues: u16,
        unit_prbs: u32,
        buffer_ref_bytes: f64,
        measure_time: bool,
    ) -> Self {
        Self { direction, intent_based, unit_prbs, buffer_ref_bytes, measure_time, n_ues, cursor: 0 }
    }

    pub fn cursor(&self) -> u16 {
        self.cursor
    }

    /// Select UEs and place them on the units not in `occupied`.
    pub fn decide(&mut self, strategy: Strategy, ues: &[UeState], occupied: &[bool], b_max: u32) -> crate::Result<Decision> {
        let started = self.measure_time.then(Instant::now);
        let items: Vec<SchedulingItem> = ues
            .iter()
            .filter_map(|ue| {
                let demand = estimate_demand(ue, self.unit_prbs, b_max)?;
                Some(SchedulingItem {
                    rnti: ue.rnti,
                    utility: utility(strategy, ue, self.buffer_ref_bytes),
                    demand,
                    relevant: ue.relevant,
                })
            })
            .collect();

        let (selection, candidates) = match strategy {
            Strategy::Rr => {
                let order = if self.intent_based {
                    let (rel, irr): (Vec<_>, Vec<_>) = items.iter().copied().partition(|i| i.relevant);
                    let mut order = cyclic_order(&rel, self.cursor, self.n_ues);
                    let mut cum: u64 = order.iter().map(|i| i.demand as u64).sum();
                    for item in cyclic_order(&irr, self.cursor, self.n_ues) {
                        if cum >= b_max as u64 {
                            break;
                        }
                        cum += item.demand as u64;
                        order.push(item);
                    }
                    order
                } else {
                    cyclic_order(&items, self.cursor, self.n_ues)
                };
                let (sel, next) = serve_in_order(&order, b_max, self.cursor, self.n_ues);
                self.cursor = next;
                (sel, order.len())
            }
            _ => {
                let pool = admit_candidates(&items, self.intent_based, b_max);
                (greedy_select(&pool, b_max), pool.len())
            }
        };

        let direction_cqi = |rnti: u16| ues.iter().find(|u| u.rnti == rnti).map_or(0, |u| u.cqi);
        let alloc = build_allocation(&selection.items, self.direction, occupied, b_max, direction_cqi)?;
        let decision_time_us = started.map(|t| t.elapsed().as_secs_f64() * 1e6);
        Ok(Decision { alloc, candidates, decision_time_us })
    }
}
