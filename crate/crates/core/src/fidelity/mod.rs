//! Post-episode image fidelity and the Intent Satisfaction Score.
//!
//! The fidelity score is a convex combination of a semantic term (embedding
//! similarity scaled by patch coverage), a content term (block variance
//! retention) and a structural term (SSIM), all on 224x224 grayscale.

pub mod content;
pub mod preprocess;
pub mod semantic;
pub mod sidecar;
pub mod ssim;

use serde::Serialize;

pub use content::{content_fidelity, ContentParams};
pub use preprocess::{preprocess, EVAL_SIDE};
pub use semantic::{semantic_fidelity, surrogate_embed, EmbeddingProvider, SemanticScore, SurrogateEmbedding};
pub use sidecar::SidecarProvider;
pub use ssim::{ssim, ssim_index};

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::media::{reconstruct, ImageFlow, Reconstruction, RgbImage};

const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FidelityWeights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for FidelityWeights {
    fn default() -> Self {
        Self { alpha: 0.4, beta: 0.3, gamma: 0.3 }
    }
}

impl FidelityWeights {
    pub fn validate(&self) -> Result<()> {
        for (field, w) in [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)] {
            if !(0.0..=1.0).contains(&w) {
                return Err(Error::validation(field, format!("must lie in [0, 1], got {w}")));
            }
        }
        let sum = self.alpha + self.beta + self.gamma;
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::validation("alpha", format!("alpha + beta + gamma must be 1, got {sum}")));
        }
        Ok(())
    }

    pub fn score(&self, f0: f64, f1: f64, f2: f64) -> f64 {
        self.alpha * f0 + self.beta * f1 + self.gamma * f2
    }
}

/// Relevance-gated satisfaction: `score` if relevant and at least `f_min`, else 0.
pub fn iss(score: f64, relevant: bool, f_min: f64) -> f64 {
    if relevant && score >= f_min {
        score
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityParams {
    pub weights: FidelityWeights,
    pub f_min: f64,
    pub content: ContentParams,
    pub patch_grid: usize,
    pub patch_threshold: f64,
}

impl Default for FidelityParams {
    fn default() -> Self {
        Self {
            weights: FidelityWeights::default(),
            f_min: 0.2,
            content: ContentParams::default(),
            patch_grid: 4,
            patch_threshold: 0.8,
        }
    }
}

impl FidelityParams {
    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        Self {
            weights: cfg.weights(),
            f_min: cfg.f_min,
            content: ContentParams {
                block_px: cfg.content_block_px,
                var_threshold: cfg.content_var_threshold,
                ratio: cfg.content_ratio,
            },
            patch_grid: cfg.patch_grid,
            patch_threshold: cfg.patch_threshold,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FidelityReport {
    pub f0: f64,
    pub f1: f64,
    pub f2: f64,
    pub coverage: f64,
    pub score: f64,
    pub iss: f64,
    pub relevant: bool,
    pub undecodable: bool,
}

/// Score a received image against its reference; `None` means undecodable.
pub fn evaluate_images(
    reference: &RgbImage,
    received: Option<&RgbImage>,
    relevant: bool,
    params: &FidelityParams,
    provider: &mut dyn EmbeddingProvider,
) -> Result<FidelityReport> {
    let Some(received) = received else {
        return Ok(FidelityReport {
            f0: 0.0,
            f1: 0.0,
            f2: 0.0,
            coverage: 0.0,
            score: 0.0,
            iss: 0.0,
            relevant,
            undecodable: true,
        });
    };
    let a = preprocess(reference)?;
    let b = preprocess(received)?;
    let sem = semantic_fidelity(&a, &b, provider, params.patch_grid, params.patch_threshold)?;
    let f1 = content_fidelity(&a, &b, &params.content);
    let f2 = ssim(&a, &b)?;
    let score = params.weights.score(sem.f0, f1, f2).clamp(0.0, 1.0);
    Ok(FidelityReport {
        f0: sem.f0,
        f1,
        f2,
        coverage: sem.coverage,
        score,
        iss: iss(score, relevant, params.f_min),
        relevant,
        undecodable: false,
    })
}

/// Reconstruct a finished flow and score it.
pub fn evaluate_flow(flow: &ImageFlow, params: &FidelityParams, provider: &mut dyn EmbeddingProvider) -> Result<FidelityReport> {
    let rec = reconstruct(flow);
    let received = match &rec {
        Reconstruction::Image { image, .. } => Some(image),
        Reconstruction::Undecodable => None,
    };
    evaluate_images(&flow.source.decoded, received, flow.relevant, params, provider)
}
