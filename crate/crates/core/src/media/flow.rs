use std::sync::Arc;

use super::buffer::{RlcBuffer, Segment};
use super::dataset::SourceImage;
use super::image::RgbImage;
use super::png::{self, PngChunk};
use crate::Direction;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PacketStatus {
    /// Not yet released by the source.
    Pending,
    /// In the RLC buffer or in HARQ.
    InFlight,
    Delivered,
    /// A segment was discarded after the last HARQ attempt.
    Dropped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Packet {
    pub seq: u32,
    /// Byte range `[start, end)` of the source file.
    pub start: usize,
    pub end: usize,
    pub criticality: f64,
    pub created_tti: Option<u64>,
    pub delivered_tti: Option<u64>,
    pub status: PacketStatus,
    pub bytes_delivered: u32,
}

impl Packet {
    pub fn len(&self) -> u32 {
        (self.end - self.start) as u32
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

/// Cut `source_len` bytes into contiguous `pkt_bytes` slices. Each packet
/// inherits the highest criticality of the chunks it overlaps; the 8-byte
/// signature counts as header.
pub fn packetize(source_len: usize, chunks: &[PngChunk], pkt_bytes: usize) -> Vec<Packet> {
    assert!(pkt_bytes > 0);
    (0..source_len.div_ceil(pkt_bytes))
        .map(|i| {
            let start = i * pkt_bytes;
            let end = (start + pkt_bytes).min(source_len);
            let mut crit = chunks
                .iter()
                .filter(|c| c.span().start < end && start < c.span().end)
                .map(|c| c.criticality)
                .fold(0.0, f64::max);
            if start < png::SIGNATURE.len() {
                crit = 1.0;
            }
            Packet {
                seq: i as u32,
                start,
                end,
                criticality: crit,
                created_tti: None,
                delivered_tti: None,
                status: PacketStatus::Pending,
                bytes_delivered: 0,
            }
        })
        .collect()
}

/// One image transfer (one UE, one direction) for the length of an episode.
#[derive(Debug, Clone)]
pub struct ImageFlow {
    pub ue: u16,
    pub direction: Direction,
    pub source: Arc<SourceImage>,
    pub relevant: bool,
    pub pkt_bytes: usize,
    pub rate_bps: u64,
    pub packets: Vec<Packet>,
    pub buffer: RlcBuffer,
    next_release: usize,
}

impl ImageFlow {
    pub fn new(ue: u16, direction: Direction, source: Arc<SourceImage>, relevant: bool, pkt_bytes: usize, rate_bps: u64) -> Self {
        let packets = packetize(source.bytes.len(), &source.chunks, pkt_bytes);
        Self { ue, direction, source, relevant, pkt_bytes, rate_bps, packets, buffer: RlcBuffer::default(), next_release: 0 }
    }

    /// TTI at which the source emits packet `k`: `floor(k * pkt_bits / rate)` in ms.
    pub fn release_tti(&self, k: usize) -> u64 {
        (k as u128 * self.pkt_bytes as u128 * 8 * 1000 / self.rate_bps as u128) as u64
    }

    /// Inter-packet interval in milliseconds.
    pub fn interval_ms(&self) -> f64 {
        self.pkt_bytes as f64 * 8.0 * 1000.0 / self.rate_bps as f64
    }

    /// Push every packet whose release time has come into the RLC buffer.
    pub fn release_due(&mut self, tti: u64) -> usize {
        let mut n = 0;
        while self.next_release < self.packets.len() && self.release_tti(self.next_release) <= tti {
            let p = &mut self.packets[self.next_release];
            p.created_tti = Some(tti);
            p.status = PacketStatus::InFlight;
            self.buffer.push(p.seq, p.len(), p.criticality);
            self.next_release += 1;
            n += 1;
        }
        n
    }

    pub fn released(&self) -> usize {
        self.next_release
    }

    pub fn on_delivered(&mut self, seg: Segment, tti: u64) {
        let p = &mut self.packets[seg.seq as usize];
        p.bytes_delivered += seg.bytes;
        if p.status == PacketStatus::InFlight && p.bytes_delivered == p.len() {
            p.status = PacketStatus::Delivered;
            p.delivered_tti = Some(tti);
        }
    }

    pub fn on_dropped(&mut self, seg: Segment) {
        let p = &mut self.packets[seg.seq as usize];
        if p.status == PacketStatus::InFlight {
            p.status = PacketStatus::Dropped;
        }
    }

    pub fn is_delivered(&self, seq: usize) -> bool {
        self.packets[seq].status == PacketStatus::Delivered
    }

    /// Per-packet delivery bitmap.
    pub fn received_mask(&self) -> Vec<bool> {
        self.packets.iter().map(|p| p.status == PacketStatus::Delivered).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Reconstruction {
    Image { image: RgbImage, rows_decoded: u32 },
    Undecodable,
}

/// Rebuild the received image from the delivered packets only.
pub fn reconstruct(flow: &ImageFlow) -> Reconstruction {
    reconstruct_from_mask(&flow.source.bytes, &flow.received_mask(), flow.pkt_bytes)
}

/// Reconstruction given an explicit per-packet delivery mask.
pub fn reconstruct_from_mask(bytes: &[u8], mask: &[bool], pkt_bytes: usize) -> Reconstruction {
    let patched: Vec<u8> =
        bytes.iter().enumerate().map(|(i, &b)| if mask[i / pkt_bytes] { b } else { 0 }).collect();
    match png::decode_tolerant(&patched, |i| mask[i / pkt_bytes]) {
        Ok(d) => Reconstruction::Image { image: d.image, rows_decoded: d.rows_decoded },
        Err(_) => Reconstruction::Undecodable,
    }
}
