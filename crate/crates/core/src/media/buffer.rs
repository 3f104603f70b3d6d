use std::collections::VecDeque;

/// Part of a packet carried by one transport block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub seq: u32,
    pub bytes: u32,
}

#[derive(Debug, Clone)]
struct Queued {
    seq: u32,
    remaining: u32,
    criticality: f64,
}

/// FIFO RLC transmit buffer of one flow. Packets may be segmented across
/// transport blocks; the drain order is always the arrival order.
#[derive(Debug, Clone, Default)]
pub struct RlcBuffer {
    queue: VecDeque<Queued>,
    bytes: u64,
}

impl RlcBuffer {
    pub fn push(&mut self, seq: u32, len: u32, criticality: f64) {
        self.queue.push_back(Queued { seq, remaining: len, criticality });
        self.bytes += len as u64;
    }

    pub fn bytes(&self) -> u64 {
        self.bytes
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn packets(&self) -> usize {
        self.queue.len()
    }

    /// Highest criticality among queued packets.
    pub fn max_criticality(&self) -> Option<f64> {
        self.queue.iter().map(|q| q.criticality).reduce(f64::max)
    }

    pub fn queued_seqs(&self) -> impl Iterator<Item = u32> + '_ {
        self.queue.iter().map(|q| q.seq)
    }

    /// Dequeue up to `max_bytes` from the head, segmenting the last packet if needed.
    pub fn take(&mut self, max_bytes: u64) -> Vec<Segment> {
        let mut left = max_bytes;
        let mut out = Vec::new();
        while left > 0 {
            let Some(head) = self.queue.front_mut() else { break };
            let n = (head.remaining as u64).min(left) as u32;
            out.push(Segment { seq: head.seq, bytes: n });
            head.remaining -= n;
            left -= n as u64;
            self.bytes -= n as u64;
            if head.remaining == 0 {
                self.queue.pop_front();
            }
        }
        out
    }
}
