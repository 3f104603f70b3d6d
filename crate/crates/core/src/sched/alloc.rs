use serde::{Deserialize, Serialize};

use super::knapsack::SchedulingItem;
use crate::error::{Error, Result};
use crate::Direction;

/// Resources granted to one UE for a scheduling interval.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grant {
    pub rnti: u16,
    /// Uplink: PRB indices of one contiguous span. Downlink: RBG indices, ascending.
    pub units: Vec<u32>,
    pub mcs: u8,
}

impl Grant {
    pub fn n_units(&self) -> u32 {
        self.units.len() as u32
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AllocationMap {
    pub direction: Direction,
    pub grants: Vec<Grant>,
    /// Budget for new transmissions in this interval.
    pub budget: u32,
}

impl AllocationMap {
    pub fn empty(direction: Direction, budget: u32) -> Self {
        Self { direction, grants: Vec::new(), budget }
    }

    pub fn used(&self) -> u32 {
        self.grants.iter().map(Grant::n_units).sum()
    }

    pub fn grant_for(&self, rnti: u16) -> Option<&Grant> {
        self.grants.iter().find(|g| g.rnti == rnti)
    }

    /// Structural checks: disjoint units, uplink contiguity, budget respected.
    pub fn check(&self, capacity: u32) -> Result<()> {
        let mut seen = vec![false; capacity as usize];
        for g in &self.grants {
            for &u in &g.units {
                let slot = seen
                    .get_mut(u as usize)
                    .ok_or_else(|| Error::Allocation(format!("unit {u} outside capacity {capacity}")))?;
                if *slot {
                    return Err(Error::Allocation(format!("unit {u} granted twice")));
                }
                *slot = true;
            }
            if self.direction == Direction::Ul && g.units.windows(2).any(|w| w[1] != w[0] + 1) {
                return Err(Error::Allocation(format!("uplink grant of rnti {} is not contiguous", g.rnti)));
            }
        }
        if self.used() > self.budget {
            return Err(Error::Allocation(format!("{} units granted over a budget of {}", self.used(), self.budget)));
        }
        Ok(())
    }
}

/// Place the selection on the carrier, avoiding `occupied` units.
///
/// Uplink grants are the first contiguous free span of the required length,
/// packed left to right in selection order. Downlink grants take the
/// lowest-index free RBGs. `mcs_of` maps an RNTI to its MCS.
pub fn build_allocation(
    selection: &[SchedulingItem],
    direction: Direction,
    occupied: &[bool],
    budget: u32,
    mcs_of: impl Fn(u16) -> u8,
) -> Result<AllocationMap> {
    let mut free: Vec<bool> = occupied.iter().map(|o| !o).collect();
    let mut grants = Vec::with_capacity(selection.len());
    for item in selection {
        let need = item.demand as usize;
        let units: Vec<u32> = match direction {
            Direction::Ul => {
                let mut run = 0usize;
                let mut start = None;
                for (i, &f) in free.iter().enumerate() {
                    run = if f { run + 1 } else { 0 };
                    if run == need {
                        start = Some(i + 1 - need);
                        break;
                    }
                }
                let s = start.ok_or_else(|| {
                    Error::Allocation(format!("no contiguous span of {need} PRBs for rnti {}", item.rnti))
                })?;
                (s as u32..(s + need) as u32).collect()
            }
            Direction::Dl => {
                let picked: Vec<u32> =
                    free.iter().enumerate().filter(|(_, &f)| f).map(|(i, _)| i as u32).take(need).collect();
                if picked.len() < need {
                    return Err(Error::Allocation(format!("only {} free RBGs for rnti {}", picked.len(), item.rnti)));
                }
                picked
            }
        };
        for &u in &units {
            free[u as usize] = false;
        }
        if !units.is_empty() {
            grants.push(Grant { rnti: item.rnti, units, mcs: mcs_of(item.rnti) });
        }
    }
    let map = AllocationMap { direction, grants, budget };
    map.check(occupied.len() as u32)?;
    Ok(map)
}
