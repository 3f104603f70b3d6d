use crate::media::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContentParams {
    pub block_px: usize,
    pub var_threshold: f64,
    /// Minimum variance ratio for a block to count as retained.
    pub ratio: f64,
}

impl Default for ContentParams {
    fn default() -> Self {
        Self { block_px: 16, var_threshold: 10.0, ratio: 0.5 }
    }
}

fn block_variance(img: &GrayImage, x0: usize, y0: usize, n: usize) -> f64 {
    let mut sum = 0.0;
    let mut sq = 0.0;
    for y in y0..y0 + n {
        for &v in &img.data[y * img.width + x0..y * img.width + x0 + n] {
            sum += v;
            sq += v * v;
        }
    }
    let count = (n * n) as f64;
    let mean = sum / count;
    (sq / count - mean * mean).max(0.0)
}

/// Fraction of the reference's content-bearing blocks whose variance survives
/// in the reconstruction. Returns 1 when the reference has no such block.
pub fn content_fidelity(reference: &GrayImage, received: &GrayImage, p: &ContentParams) -> f64 {
    let n = p.block_px;
    let (mut bearing, mut kept) = (0usize, 0usize);
    for by in 0..reference.height / n {
        for bx in 0..reference.width / n {
            let va = block_variance(reference, bx * n, by * n, n);
            if va <= p.var_threshold {
                continue;
            }
            bearing += 1;
            let vb = block_variance(received, bx * n, by * n, n);
            if va.min(vb) / va.max(vb) >= p.ratio {
                kept += 1;
            }
        }
    }
    if bearing == 0 {
        1.0
    } else {
        kept as f64 / bearing as f64
    }
}
