//! Labelled image datasets.
//!
//! A dataset is a directory of PNG files plus a `labels.csv` manifest:
//!
//! ```text
//! filename,object_ids
//! img_000.png,3
//! img_001.png,"1,4"
//! ```
//!
//! The first line is the literal header. Each following row names a file in
//! the same directory and the object IDs (non-negative integers, separated by
//! commas) it contains. Fields follow RFC 4180 quoting, so a multi-ID list is
//! enclosed in double quotes. Rows are UTF-8, `\n` terminated.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::image::RgbImage;
use super::png::{self, EncodeInput, PngChunk};
use crate::error::{Error, Result};

pub const MANIFEST: &str = "labels.csv";

#[derive(Debug, Clone)]
pub struct SourceImage {
    pub name: String,
    pub bytes: Vec<u8>,
    pub chunks: Vec<PngChunk>,
    pub labels: BTreeSet<u32>,
    /// Lossless decode, used as the transmitted reference.
    pub decoded: RgbImage,
}

impl SourceImage {
    pub fn from_bytes(name: &str, bytes: Vec<u8>, labels: BTreeSet<u32>) -> Result<Self> {
        let wrap = |source| Error::Image { file: name.to_string(), source };
        let chunks = png::parse_png(&bytes).map_err(wrap)?;
        let decoded = png::decode_png(&bytes).map_err(wrap)?;
        Ok(Self { name: name.to_string(), bytes, chunks, labels, decoded })
    }
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub images: Vec<Arc<SourceImage>>,
}

fn parse_ids(field: &str, line: usize) -> Result<BTreeSet<u32>> {
    field
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<u32>().map_err(|_| Error::Dataset(format!("{MANIFEST}:{line}: bad object id `{s}`"))))
        .collect()
}

impl Dataset {
    /// Load every image listed in the manifest, in manifest order.
    pub fn load(dir: &Path) -> Result<Self> {
        let manifest = dir.join(MANIFEST);
        if !manifest.is_file() {
            return Err(Error::Dataset(format!("{} not found", manifest.display())));
        }
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_path(&manifest)?;
        let mut images = Vec::new();
        for (i, row) in rdr.records().enumerate() {
            let row = row?;
            let line = i + 2;
            let (Some(name), Some(ids)) = (row.get(0), row.get(1)) else {
                return Err(Error::Dataset(format!("{MANIFEST}:{line}: expected 2 fields")));
            };
            if name.contains(['/', '\\']) {
                return Err(Error::Dataset(format!("{MANIFEST}:{line}: file name must not contain a path")));
            }
            let labels = parse_ids(ids, line)?;
            if labels.is_empty() {
                return Err(Error::Dataset(format!("{MANIFEST}:{line}: no object ids")));
            }
            let path = dir.join(name);
            let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
            images.push(Arc::new(SourceImage::from_bytes(name, bytes, labels)?));
        }
        if images.is_empty() {
            return Err(Error::Dataset(format!("{} lists no images", manifest.display())));
        }
        Ok(Self { images })
    }

    /// Distinct object IDs across the dataset, ascending.
    pub fn vocabulary(&self) -> Vec<u32> {
        self.images.iter().flat_map(|i| i.labels.iter().copied()).collect::<BTreeSet<_>>().into_iter().collect()
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }
}

pub fn write_manifest(dir: &Path, rows: &[(String, BTreeSet<u32>)]) -> Result<()> {
    let path = dir.join(MANIFEST);
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["filename", "object_ids"])?;
    for (name, ids) in rows {
        let ids = ids.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
        w.write_record([name.as_str(), ids.as_str()])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    Ok(())
}

/// How synthetic labels are laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelLayout {
    /// One to three distinct IDs per image drawn from the vocabulary.
    Random,
    /// Image `i` carries exactly ID `1 + i mod vocab`.
    Alternating,
}

#[derive(Debug, Clone)]
pub struct SynthSpec {
    pub count: usize,
    pub seed: u64,
    pub vocab: u32,
    pub min_side: u32,
    pub max_side: u32,
    /// Amplitude of the per-pixel noise; controls compressed size.
    pub noise: u8,
    pub idat_chunk_bytes: usize,
    pub layout: LabelLayout,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            count: 20,
            seed: 1,
            vocab: 4,
            min_side: 160,
            max_side: 256,
            noise: 10,
            idat_chunk_bytes: 8192,
            layout: LabelLayout::Random,
        }
    }
}

/// Render one synthetic scene: a smooth background, one textured shape per
/// object ID and additive noise. Returns RGB samples.
fn render_scene<R: Rng>(w: u32, h: u32, ids: &BTreeSet<u32>, noise: u8, rng: &mut R) -> Vec<u8> {
    let (w, h) = (w as usize, h as usize);
    let base: [f64; 3] = [rng.random_range(40.0..120.0), rng.random_range(40.0..120.0), rng.random_range(40.0..120.0)];
    let tilt: (f64, f64) = (rng.random_range(-0.4..0.4), rng.random_range(-0.4..0.4));
    let mut img = vec![0f64; w * h * 3];
    for y in 0..h {
        for x in 0..w {
            for c in 0..3 {
                img[3 * (y * w + x) + c] = base[c] + tilt.0 * x as f64 + tilt.1 * y as f64;
            }
        }
    }
    for &id in ids {
        let cx = rng.random_range(0.2..0.8) * w as f64;
        let cy = rng.random_range(0.2..0.8) * h as f64;
        let rx = rng.random_range(0.12..0.3) * w as f64;
        let ry = rng.random_range(0.12..0.3) * h as f64;
        let color: [f64; 3] = [rng.random_range(60.0..250.0), rng.random_range(60.0..250.0), rng.random_range(60.0..250.0)];
        let period = 4.0 + (id % 7) as f64 * 2.0;
        let angle = id as f64 * 0.7;
        for y in 0..h {
            for x in 0..w {
                let dx = (x as f64 - cx) / rx;
                let dy = (y as f64 - cy) / ry;
                let inside = match id % 3 {
                    0 => dx * dx + dy * dy <= 1.0,
                    1 => dx.abs() <= 1.0 && dy.abs() <= 1.0,
                    _ => dx.abs() + dy.abs() <= 1.0,
                };
                if inside {
                    let phase = (x as f64 * angle.cos() + y as f64 * angle.sin()) * std::f64::consts::TAU / period;
                    let stripe = 0.75 + 0.25 * phase.sin();
                    for c in 0..3 {
                        img[3 * (y * w + x) + c] = color[c] * stripe;
                    }
                }
            }
        }
    }
    img.iter()
        .map(|&v| {
            let n = if noise > 0 { rng.random_range(-(noise as f64)..=noise as f64) } else { 0.0 };
            (v + n).round().clamp(0.0, 255.0) as u8
        })
        .collect()
}

/// Write a synthetic labelled dataset to `dir` (created if needed).
pub fn generate_synthetic(dir: &Path, spec: &SynthSpec) -> Result<()> {
    if spec.count == 0 || spec.vocab == 0 || spec.min_side == 0 || spec.min_side > spec.max_side {
        return Err(Error::Dataset("invalid synthetic dataset parameters".into()));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let vocab: Vec<u32> = (1..=spec.vocab).collect();
    let mut rows = Vec::with_capacity(spec.count);
    for i in 0..spec.count {
        let ids: BTreeSet<u32> = match spec.layout {
            LabelLayout::Alternating => [1 + (i as u32 % spec.vocab)].into(),
            LabelLayout::Random => {
                let k = rng.random_range(1..=3.min(spec.vocab as usize));
                let mut v = vocab.clone();
                v.shuffle(&mut rng);
                v.into_iter().take(k).collect()
            }
        };
        let w = rng.random_range(spec.min_side..=spec.max_side);
        let h = rng.random_range(spec.min_side..=spec.max_side);
        let rgb = render_scene(w, h, &ids, spec.noise, &mut rng);
        let bytes = match i % 4 {
            // every fourth image grayscale, one in four palette
            1 => {
                let gray: Vec<u8> = rgb
                    .chunks(3)
                    .map(|p| (0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64).round() as u8)
                    .collect();
                png::encode_png(w, h, EncodeInput::Gray(&gray), spec.idat_chunk_bytes)
            }
            3 => {
                // 3-3-2 bit colour cube
                let pal: Vec<[u8; 3]> = (0..=255u8)
                    .map(|v| [((v >> 5) & 7) * 36, ((v >> 2) & 7) * 36, (v & 3) * 85])
                    .collect();
                let idx: Vec<u8> = rgb
                    .chunks(3)
                    .map(|p| ((p[0] as u16 * 7 / 255) << 5 | (p[1] as u16 * 7 / 255) << 2 | (p[2] as u16 * 3 / 255)) as u8)
                    .collect();
                png::encode_png(w, h, EncodeInput::Palette(&idx, &pal), spec.idat_chunk_bytes)
            }
            _ => png::encode_png(w, h, EncodeInput::Rgb(&rgb), spec.idat_chunk_bytes),
        };
        let name = format!("img_{i:04}.png");
        let path = dir.join(&name);
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        rows.push((name, ids));
    }
    write_manifest(dir, &rows)
}
