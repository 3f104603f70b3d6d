//! PNG chunk walking, criticality tags, a small encoder and a loss-tolerant decoder.
//!
//! The decoder only handles what the simulator needs: non-interlaced images
//! of any standard colour type and bit depth, converted to 8-bit RGB.

use std::io::Write;

use flate2::write::ZlibEncoder;
use flate2::{Compression, Decompress, FlushDecompress, Status};
use thiserror::Error;

use super::image::RgbImage;

pub const SIGNATURE: [u8; 8] = [0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a];

/// Length, type and CRC fields around every chunk payload.
pub const CHUNK_OVERHEAD: usize = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PngError {
    #[error("not a PNG file (bad signature)")]
    BadSignature,
    #[error("truncated chunk at byte {0}")]
    TruncatedChunk(usize),
    #[error("first chunk is not IHDR")]
    MissingIhdr,
    #[error("invalid IHDR: {0}")]
    BadIhdr(String),
    #[error("interlaced (Adam7) images are not supported")]
    Interlaced,
    #[error("image is undecodable")]
    Undecodable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PngChunk {
    pub kind: [u8; 4],
    /// Byte index of the length field.
    pub offset: usize,
    /// Payload length in bytes.
    pub length: u32,
    pub crc_ok: bool,
    pub criticality: f64,
}

impl PngChunk {
    pub fn kind_str(&self) -> &str {
        std::str::from_utf8(&self.kind).unwrap_or("????")
    }

    /// Byte range of the whole chunk record, fields included.
    pub fn span(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + CHUNK_OVERHEAD + self.length as usize
    }

    pub fn data_range(&self) -> std::ops::Range<usize> {
        self.offset + 8..self.offset + 8 + self.length as usize
    }
}

fn be_u32(b: &[u8]) -> u32 {
    u32::from_be_bytes([b[0], b[1], b[2], b[3]])
}

/// Walk the chunk records of a PNG stream up to and including IEND.
///
/// CRC mismatches are recorded per chunk and do not abort the walk.
/// Criticality is filled in with [`criticality_of`].
pub fn parse_png(bytes: &[u8]) -> Result<Vec<PngChunk>, PngError> {
    if bytes.len() < 8 || bytes[..8] != SIGNATURE {
        return Err(PngError::BadSignature);
    }
    let mut chunks = Vec::new();
    let mut pos = 8;
    while pos < bytes.len() {
        if pos + 8 > bytes.len() {
            return Err(PngError::TruncatedChunk(pos));
        }
        let length = be_u32(&bytes[pos..]);
        let kind: [u8; 4] = bytes[pos + 4..pos + 8].try_into().unwrap();
        let end = pos + CHUNK_OVERHEAD + length as usize;
        if end > bytes.len() {
            return Err(PngError::TruncatedChunk(pos));
        }
        let crc = crc32fast::hash(&bytes[pos + 4..end - 4]);
        let crc_ok = crc == be_u32(&bytes[end - 4..]);
        chunks.push(PngChunk { kind, offset: pos, length, crc_ok, criticality: 0.0 });
        pos = end;
        if &kind == b"IEND" {
            break;
        }
    }
    if chunks.first().map(|c| &c.kind) != Some(b"IHDR") {
        return Err(PngError::MissingIhdr);
    }
    let crit = criticality_of(&chunks);
    for (c, v) in chunks.iter_mut().zip(crit) {
        c.criticality = v;
    }
    Ok(chunks)
}

/// Criticality per chunk: IHDR 1.0, PLTE 0.9, the k-th IDAT
/// `max(0.8 - 0.05 (k - 1), 0.2)`, IEND and ancillary chunks 0.1.
pub fn criticality_of(chunks: &[PngChunk]) -> Vec<f64> {
    let mut idat_seen = 0u32;
    chunks
        .iter()
        .map(|c| match &c.kind {
            b"IHDR" => 1.0,
            b"PLTE" => 0.9,
            b"IDAT" => {
                idat_seen += 1;
                (0.8 - 0.05 * (idat_seen - 1) as f64).max(0.2)
            }
            _ => 0.1,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColorType {
    Gray = 0,
    Rgb = 2,
    Palette = 3,
    GrayAlpha = 4,
    Rgba = 6,
}

impl ColorType {
    fn from_u8(v: u8) -> Option<Self> {
        Some(match v {
            0 => ColorType::Gray,
            2 => ColorType::Rgb,
            3 => ColorType::Palette,
            4 => ColorType::GrayAlpha,
            6 => ColorType::Rgba,
            _ => return None,
        })
    }

    fn samples(self) -> usize {
        match self {
            ColorType::Gray | ColorType::Palette => 1,
            ColorType::GrayAlpha => 2,
            ColorType::Rgb => 3,
            ColorType::Rgba => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Header {
    pub width: u32,
    pub height: u32,
    pub bit_depth: u8,
    pub color: ColorType,
}

impl Header {
    fn parse(data: &[u8]) -> Result<Self, PngError> {
        if data.len() != 13 {
            return Err(PngError::BadIhdr(format!("length {}", data.len())));
        }
        let width = be_u32(&data[0..]);
        let height = be_u32(&data[4..]);
        let bit_depth = data[8];
        let color = ColorType::from_u8(data[9]).ok_or_else(|| PngError::BadIhdr(format!("colour type {}", data[9])))?;
        if width == 0 || height == 0 {
            return Err(PngError::BadIhdr("zero dimension".into()));
        }
        let depth_ok = match color {
            ColorType::Gray => matches!(bit_depth, 1 | 2 | 4 | 8 | 16),
            ColorType::Palette => matches!(bit_depth, 1 | 2 | 4 | 8),
            _ => matches!(bit_depth, 8 | 16),
        };
        if !depth_ok {
            return Err(PngError::BadIhdr(format!("bit depth {bit_depth} for {color:?}")));
        }
        if data[10] != 0 || data[11] != 0 {
            return Err(PngError::BadIhdr("unknown compression or filter method".into()));
        }
        if data[12] != 0 {
            return Err(PngError::Interlaced);
        }
        Ok(Header { width, height, bit_depth, color })
    }

    /// Bytes per complete pixel, rounded up to 1 (the filter stride).
    fn filter_bpp(&self) -> usize {
        ((self.color.samples() * self.bit_depth as usize) / 8).max(1)
    }

    fn row_bytes(&self) -> usize {
        (self.width as usize * self.color.samples() * self.bit_depth as usize).div_ceil(8)
    }
}

// ---------------------------------------------------------------------------
// Encoding

/// Pixel payload handed to [`encode_png`]. Samples are 8-bit.
#[derive(Debug, Clone)]
pub enum EncodeInput<'a> {
    Gray(&'a [u8]),
    Rgb(&'a [u8]),
    /// Palette indices plus an RGB palette of at most 256 entries.
    Palette(&'a [u8], &'a [[u8; 3]]),
}

fn paeth(a: u8, b: u8, c: u8) -> u8 {
    let p = a as i16 + b as i16 - c as i16;
    let pa = (p - a as i16).abs();
    let pb = (p - b as i16).abs();
    let pc = (p - c as i16).abs();
    if pa <= pb && pa <= pc {
        a
    } else if pb <= pc {
        b
    } else {
        c
    }
}

fn filter_row(kind: u8, row: &[u8], prev: &[u8], bpp: usize, out: &mut Vec<u8>) {
    out.push(kind);
    for i in 0..row.len() {
        let a = if i >= bpp { row[i - bpp] } else { 0 };
        let b = prev[i];
        let c = if i >= bpp { prev[i - bpp] } else { 0 };
        let pred = match kind {
            0 => 0,
            1 => a,
            2 => b,
            3 => ((a as u16 + b as u16) / 2) as u8,
            _ => paeth(a, b, c),
        };
        out.push(row[i].wrapping_sub(pred));
    }
}

fn write_chunk(out: &mut Vec<u8>, kind: &[u8; 4], data: &[u8]) {
    out.extend_from_slice(&(data.len() as u32).to_be_bytes());
    let start = out.len();
    out.extend_from_slice(kind);
    out.extend_from_slice(data);
    let crc = crc32fast::hash(&out[start..]);
    out.extend_from_slice(&crc.to_be_bytes());
}

/// Encode an 8-bit image, splitting the zlib stream into IDAT chunks of at
/// most `idat_chunk_bytes`. Each row uses the filter with the smallest sum of
/// absolute residuals.
pub fn encode_png(width: u32, height: u32, input: EncodeInput<'_>, idat_chunk_bytes: usize) -> Vec<u8> {
    let (color, samples, pixels, palette) = match input {
        EncodeInput::Gray(p) => (ColorType::Gray, 1, p, None),
        EncodeInput::Rgb(p) => (ColorType::Rgb, 3, p, None),
        EncodeInput::Palette(p, pal) => (ColorType::Palette, 1, p, Some(pal)),
    };
    let row_len = width as usize * samples;
    assert_eq!(pixels.len(), row_len * height as usize, "pixel buffer size");

    let mut raw = Vec::with_capacity((row_len + 1) * height as usize);
    let zero = vec![0u8; row_len];
    let mut scratch = Vec::with_capacity(row_len + 1);
    for y in 0..height as usize {
        let row = &pixels[y * row_len..(y + 1) * row_len];
        let prev = if y == 0 { &zero[..] } else { &pixels[(y - 1) * row_len..y * row_len] };
        let mut best: Option<(u64, Vec<u8>)> = None;
        for kind in 0..5u8 {
            scratch.clear();
            filter_row(kind, row, prev, samples, &mut scratch);
            let cost: u64 = scratch[1..].iter().map(|&v| (v as i8).unsigned_abs() as u64).sum();
            if best.as_ref().is_none_or(|(c, _)| cost < *c) {
                best = Some((cost, scratch.clone()));
            }
        }
        raw.extend_from_slice(&best.unwrap().1);
    }
    let mut z = ZlibEncoder::new(Vec::new(), Compression::default());
    z.write_all(&raw).expect("in-memory write");
    let compressed = z.finish().expect("in-memory write");

    let mut out = SIGNATURE.to_vec();
    let mut ihdr = Vec::with_capacity(13);
    ihdr.extend_from_slice(&width.to_be_bytes());
    ihdr.extend_from_slice(&height.to_be_bytes());
    ihdr.extend_from_slice(&[8, color as u8, 0, 0, 0]);
    write_chunk(&mut out, b"IHDR", &ihdr);
    if let Some(pal) = palette {
        let flat: Vec<u8> = pal.iter().flatten().copied().collect();
        write_chunk(&mut out, b"PLTE", &flat);
    }
    for part in compressed.chunks(idat_chunk_bytes.max(1)) {
        write_chunk(&mut out, b"IDAT", part);
    }
    write_chunk(&mut out, b"IEND", &[]);
    out
}

// ---------------------------------------------------------------------------
// Decoding

/// Result of a (possibly partial) decode.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub image: RgbImage,
    /// Leading rows recovered from the stream; the rest are mid-gray.
    pub rows_decoded: u32,
}

/// Decode a complete PNG file. Any missing row is an error.
pub fn decode_png(bytes: &[u8]) -> Result<RgbImage, PngError> {
    let d = decode_tolerant(bytes, |_| true)?;
    if d.rows_decoded != d.image.height {
        return Err(PngError::Undecodable);
    }
    Ok(d.image)
}

/// Mid-gray fill value for rows that could not be recovered.
pub const FILL_GRAY: u8 = 128;

/// Prefix decode of a PNG stream in which some bytes may be missing.
///
/// `valid(i)` reports whether byte `i` arrived. Missing bytes are treated as
/// zero; CRCs are ignored. Chunks are walked until a chunk header is missing,
/// the IDAT payload is cut at its first missing byte, inflated as far as it
/// goes and unfiltered until the first bad filter byte. Rows after that are
/// filled with mid-gray. Fails when IHDR is incomplete or no row decodes.
pub fn decode_tolerant<F: Fn(usize) -> bool>(bytes: &[u8], valid: F) -> Result<Decoded, PngError> {
    let all_valid = |r: std::ops::Range<usize>| r.end <= bytes.len() && r.clone().all(&valid);

    if !all_valid(0..8) || bytes[..8] != SIGNATURE {
        return Err(PngError::Undecodable);
    }
    // IHDR must be present and intact: 8..8+25.
    if !all_valid(8..33) || &bytes[12..16] != b"IHDR" || be_u32(&bytes[8..]) != 13 {
        return Err(PngError::Undecodable);
    }
    let header = Header::parse(&bytes[16..29])?;

    let mut palette: Vec<[u8; 3]> = Vec::new();
    let mut idat: Vec<u8> = Vec::new();
    let mut idat_complete = true;
    let mut pos = 33;
    while idat_complete && pos + 8 <= bytes.len() && all_valid(pos..pos + 8) {
        let length = be_u32(&bytes[pos..]) as usize;
        let kind = &bytes[pos + 4..pos + 8];
        let data_start = pos + 8;
        let data_end = (data_start + length).min(bytes.len());
        match kind {
            b"PLTE" => {
                palette = bytes[data_start..data_end].chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
            }
            b"IDAT" => {
                for (i, &b) in bytes.iter().enumerate().take(data_end).skip(data_start) {
                    if !valid(i) {
                        idat_complete = false;
                        break;
                    }
                    idat.push(b);
                }
                if data_end < data_start + length {
                    idat_complete = false;
                }
            }
            b"IEND" => break,
            _ => {}
        }
        pos = data_start + length + 4;
    }

    let row_bytes = header.row_bytes();
    let stride = row_bytes + 1;
    let expected = stride * header.height as usize;
    let raw = inflate_prefix(&idat, expected);

    let bpp = header.filter_bpp();
    let mut prev = vec![0u8; row_bytes];
    let mut cur = vec![0u8; row_bytes];
    let mut image = RgbImage::filled(header.width, header.height, FILL_GRAY);
    let mut rows = 0u32;
    for y in 0..header.height as usize {
        let Some(line) = raw.get(y * stride..(y + 1) * stride) else { break };
        if !unfilter(line[0], &line[1..], &prev, bpp, &mut cur) {
            break;
        }
        expand_row(&header, &palette, &cur, image.row_mut(y));
        std::mem::swap(&mut prev, &mut cur);
        rows += 1;
    }
    if rows == 0 {
        return Err(PngError::Undecodable);
    }
    Ok(Decoded { image, rows_decoded: rows })
}

/// Inflate as much of a zlib stream as possible, stopping at the first error
/// or once `limit` bytes have been produced.
fn inflate_prefix(data: &[u8], limit: usize) -> Vec<u8> {
    let mut d = Decompress::new(true);
    let mut out = Vec::with_capacity(limit.min(1 << 24));
    let mut buf = vec![0u8; 64 * 1024];
    loop {
        let in_before = d.total_in();
        let out_before = d.total_out();
        let res = d.decompress(&data[in_before as usize..], &mut buf, FlushDecompress::None);
        let produced = (d.total_out() - out_before) as usize;
        out.extend_from_slice(&buf[..produced]);
        if out.len() >= limit {
            out.truncate(limit);
            break;
        }
        match res {
            Ok(Status::StreamEnd) | Err(_) => break,
            Ok(_) => {
                if produced == 0 && d.total_in() == in_before {
                    break;
                }
            }
        }
    }
    out
}

fn unfilter(kind: u8, line: &[u8], prev: &[u8], bpp: usize, out: &mut [u8]) -> bool {
    if kind > 4 {
        return false;
    }
    for i in 0..line.len() {
        let a = if i >= bpp { out[i - bpp] } else { 0 };
        let b = prev[i];
        let c = if i >= bpp { prev[i - bpp] } else { 0 };
        let pred = match kind {
            0 => 0,
            1 => a,
            2 => b,
            3 => ((a as u16 + b as u16) / 2) as u8,
            _ => paeth(a, b, c),
        };
        out[i] = line[i].wrapping_add(pred);
    }
    true
}

fn sample(row: &[u8], depth: u8, idx: usize) -> u16 {
    match depth {
        16 => u16::from_be_bytes([row[2 * idx], row[2 * idx + 1]]),
        8 => row[idx] as u16,
        d => {
            let per_byte = 8 / d as usize;
            let byte = row[idx / per_byte];
            let shift = 8 - d as usize * (idx % per_byte + 1);
            ((byte >> shift) & ((1u8 << d) - 1)) as u16
        }
    }
}

fn to_u8(v: u16, depth: u8) -> u8 {
    match depth {
        16 => (v >> 8) as u8,
        8 => v as u8,
        4 => (v * 0x11) as u8,
        2 => (v * 0x55) as u8,
        _ => (v * 0xff) as u8,
    }
}

fn expand_row(h: &Header, palette: &[[u8; 3]], row: &[u8], out: &mut [u8]) {
    let s = h.color.samples();
    let d = h.bit_depth;
    for x in 0..h.width as usize {
        let px = match h.color {
            ColorType::Gray | ColorType::GrayAlpha => {
                let g = to_u8(sample(row, d, x * s), d);
                [g, g, g]
            }
            ColorType::Rgb | ColorType::Rgba => {
                [0, 1, 2].map(|c| to_u8(sample(row, d, x * s + c), d))
            }
            ColorType::Palette => {
                let i = sample(row, d, x) as usize;
                palette.get(i).copied().unwrap_or([0, 0, 0])
            }
        };
        out[3 * x..3 * x + 3].copy_from_slice(&px);
    }
}
