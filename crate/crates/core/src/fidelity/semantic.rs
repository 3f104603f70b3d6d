use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::media::GrayImage;

/// Source of unit-norm image embeddings. Implementations must be deterministic.
pub trait EmbeddingProvider {
    fn dim(&self) -> usize;
    fn embed(&mut self, image: &GrayImage) -> Result<Vec<f64>>;
    /// Free-form provider identity, recorded in run summaries.
    fn name(&self) -> String;
}

pub const INTENSITY_BINS: usize = 64;
pub const ORIENTATION_BINS: usize = 8;
pub const SURROGATE_DIM: usize = INTENSITY_BINS + ORIENTATION_BINS;
const EMPTY_GRADIENT_EPS: f64 = 1e-6;

/// Built-in deterministic provider: intensity histogram plus a
/// magnitude-weighted gradient orientation histogram.
#[derive(Debug, Clone, Copy, Default)]
pub struct SurrogateEmbedding;

pub fn surrogate_embed(img: &GrayImage) -> Vec<f64> {
    let mut v = vec![0.0; SURROGATE_DIM];
    for &p in &img.data {
        let bin = ((p.clamp(0.0, 255.0) / 256.0) * INTENSITY_BINS as f64) as usize;
        v[bin.min(INTENSITY_BINS - 1)] += 1.0;
    }
    let n: f64 = v[..INTENSITY_BINS].iter().sum();
    if n > 0.0 {
        v[..INTENSITY_BINS].iter_mut().for_each(|x| *x /= n);
    }

    let orient = &mut v[INTENSITY_BINS..];
    if img.width >= 3 && img.height >= 3 {
        for y in 1..img.height - 1 {
            for x in 1..img.width - 1 {
                let gx = img.at(x + 1, y) - img.at(x - 1, y);
                let gy = img.at(x, y + 1) - img.at(x, y - 1);
                let mag = gx.hypot(gy);
                if mag == 0.0 {
                    continue;
                }
                let theta = gy.atan2(gx).rem_euclid(TAU);
                let bin = ((theta / TAU) * ORIENTATION_BINS as f64) as usize % ORIENTATION_BINS;
                orient[bin] += mag;
            }
        }
    }
    let mass: f64 = orient.iter().sum();
    if mass > 0.0 {
        orient.iter_mut().for_each(|x| *x /= mass);
    } else {
        orient.fill(EMPTY_GRADIENT_EPS);
    }

    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    v
}

impl EmbeddingProvider for SurrogateEmbedding {
    fn dim(&self) -> usize {
        SURROGATE_DIM
    }

    fn embed(&mut self, image: &GrayImage) -> Result<Vec<f64>> {
        Ok(surrogate_embed(image))
    }

    fn name(&self) -> String {
        "surrogate-hist72".into()
    }
}

/// Cosine similarity clamped to `[0, 1]`.
pub fn similarity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Provider(format!("embedding lengths differ: {} vs {}", a.len(), b.len())));
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::Provider("zero-norm embedding".into()));
    }
    Ok((dot / (na * nb)).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemanticScore {
    pub global: f64,
    pub patch_mean: f64,
    /// Fraction of patches at or above the similarity threshold.
    pub coverage: f64,
    pub f0: f64,
}

/// Combine global similarity, mean patch similarity and coverage.
pub fn combine(global: f64, patch_mean: f64, coverage: f64) -> f64 {
    coverage / 2.0 * (global + patch_mean)
}

/// Global and `grid`x`grid` patch-level semantic similarity.
pub fn semantic_fidelity(
    reference: &GrayImage,
    received: &GrayImage,
    provider: &mut dyn EmbeddingProvider,
    grid: usize,
    threshold: f64,
) -> Result<SemanticScore> {
    let global = similarity(&provider.embed(reference)?, &provider.embed(received)?)?;
    let pw = reference.width / grid;
    let ph = reference.height / grid;
    let mut sims = Vec::with_capacity(grid * grid);
    for gy in 0..grid {
        for gx in 0..grid {
            let a = provider.embed(&reference.crop(gx * pw, gy * ph, pw, ph))?;
            let b = provider.embed(&received.crop(gx * pw, gy * ph, pw, ph))?;
            sims.push(similarity(&a, &b)?);
        }
    }
    let patch_mean = sims.iter().sum::<f64>() / sims.len() as f64;
    let coverage = sims.iter().filter(|&&s| s >= threshold).count() as f64 / sims.len() as f64;
    Ok(SemanticScore { global, patch_mean, coverage, f0: combine(global, patch_mean, coverage) })
}
