use rand::Rng;

use super::link::LinkAdaptation;
use crate::media::buffer::Segment;
use crate::Direction;

/// One transport block in flight.
#[derive(Debug, Clone, PartialEq)]
pub struct HarqProcess {
    pub ue: u16,
    pub direction: Direction,
    pub tb_bits: u64,
    /// CQI (equivalently MCS) the block was first sent with; retransmissions reuse it.
    pub cqi: u8,
    /// Transmissions made so far, including the one being evaluated.
    pub attempts: u8,
    /// PRBs (uplink) or RBGs (downlink) the block occupies on every attempt.
    pub units_reserved: u32,
    pub segments: Vec<Segment>,
}

#[derive(Debug, Default, Clone, PartialEq)]
pub struct HarqOutcome {
    pub delivered: Vec<HarqProcess>,
    pub retx: Vec<HarqProcess>,
    pub dropped: Vec<HarqProcess>,
}

/// Decode every block sent this TTI. Failed blocks are queued for
/// retransmission until `max_tx` attempts have been spent, then dropped.
pub fn harq_tick<R, F>(sent: Vec<HarqProcess>, sinr_db: F, la: &LinkAdaptation, max_tx: u8, rng: &mut R) -> HarqOutcome
where
    R: Rng + ?Sized,
    F: Fn(&HarqProcess) -> f64,
{
    let mut out = HarqOutcome::default();
    for p in sent {
        debug_assert!(p.attempts >= 1 && p.attempts <= max_tx);
        if la.tb_outcome(sinr_db(&p), p.cqi, rng) {
            out.delivered.push(p);
        } else if p.attempts >= max_tx {
            out.dropped.push(p);
        } else {
            out.retx.push(p);
        }
    }
    out
}

/// Units held back for pending retransmissions and the budget left for new data.
pub fn split_budget(capacity: u32, pending: &[HarqProcess]) -> (u32, u32) {
    let reserved: u32 = pending.iter().map(|p| p.units_reserved).sum::<u32>().min(capacity);
    (reserved, capacity - reserved)
}
