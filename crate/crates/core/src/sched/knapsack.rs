use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

/// One UE offered to the knapsack: utility `v`, demand `b` units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchedulingItem {
    pub rnti: u16,
    pub utility: f64,
    pub demand: u32,
    pub relevant: bool,
}

impl SchedulingItem {
    pub fn density(&self) -> f64 {
        self.utility / self.demand as f64
    }
}

/// Descending density; ties go to relevant UEs, then higher utility, then lower RNTI.
pub fn density_order(a: &SchedulingItem, b: &SchedulingItem) -> Ordering {
    b.density()
        .total_cmp(&a.density())
        .then_with(|| b.relevant.cmp(&a.relevant))
        .then_with(|| b.utility.total_cmp(&a.utility))
        .then_with(|| a.rnti.cmp(&b.rnti))
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Selection {
    pub items: Vec<SchedulingItem>,
    pub total_utility: f64,
    pub total_demand: u32,
}

/// Intent-based candidate pool: every relevant item, then irrelevant items in
/// density order while the cumulative demand is still below `b_max`.
/// Without intent awareness the input passes through untouched.
pub fn admit_candidates(items: &[SchedulingItem], intent_based: bool, b_max: u32) -> Vec<SchedulingItem> {
    if !intent_based {
        return items.to_vec();
    }
    let (mut pool, mut rest): (Vec<_>, Vec<_>) = items.iter().copied().partition(|i| i.relevant);
    pool.sort_by(density_order);
    rest.sort_by(density_order);
    let mut cum: u64 = pool.iter().map(|i| i.demand as u64).sum();
    for item in rest {
        if cum >= b_max as u64 {
            break;
        }
        cum += item.demand as u64;
        pool.push(item);
    }
    pool
}

/// Density greedy: scan once in density order, taking every item that still fits.
pub fn greedy_select(items: &[SchedulingItem], b_max: u32) -> Selection {
    let mut sorted = items.to_vec();
    sorted.sort_by(density_order);
    let mut sel = Selection::default();
    let mut left = b_max;
    for item in sorted {
        if item.demand <= left {
            left -= item.demand;
            sel.total_utility += item.utility;
            sel.total_demand += item.demand;
            sel.items.push(item);
        }
    }
    sel
}

/// Round robin over RNTIs `0..cycle_len`, starting at `cursor` and stopping at
/// the first UE that no longer fits. Items need not be sorted. Returns the
/// served items and the new cursor.
pub fn round_robin_select(items: &[SchedulingItem], b_max: u32, cursor: u16, cycle_len: u16) -> (Selection, u16) {
    let ordered = cyclic_order(items, cursor, cycle_len);
    serve_in_order(&ordered, b_max, cursor, cycle_len)
}

/// Items ordered by RNTI distance from `cursor` modulo `cycle_len`.
pub fn cyclic_order(items: &[SchedulingItem], cursor: u16, cycle_len: u16) -> Vec<SchedulingItem> {
    let n = cycle_len.max(1) as u32;
    let mut v = items.to_vec();
    v.sort_by_key(|i| (i.rnti as u32 + n - cursor as u32 % n) % n);
    v
}

/// Serve `ordered` front to back until the next item does not fit.
pub fn serve_in_order(ordered: &[SchedulingItem], b_max: u32, cursor: u16, cycle_len: u16) -> (Selection, u16) {
    let mut sel = Selection::default();
    let mut left = b_max;
    let mut next = cursor;
    for item in ordered {
        if item.demand > left {
            break;
        }
        left -= item.demand;
        sel.total_utility += item.utility;
        sel.total_demand += item.demand;
        sel.items.push(*item);
        next = ((item.rnti as u32 + 1) % cycle_len.max(1) as u32) as u16;
    }
    (sel, next)
}

/// Exact 0/1 knapsack by enumeration. Test oracle only; exponential in `n`.
pub fn brute_force_optimum(items: &[SchedulingItem], b_max: u32) -> f64 {
    assert!(items.len() <= 20, "enumeration oracle is limited to 20 items");
    let mut best = 0.0f64;
    for mask in 0u32..(1 << items.len()) {
        let (mut v, mut b) = (0.0, 0u64);
        for (k, it) in items.iter().enumerate() {
            if mask & (1 << k) != 0 {
                v += it.utility;
                b += it.demand as u64;
            }
        }
        if b <= b_max as u64 && v > best {
            best = v;
        }
    }
    best
}
