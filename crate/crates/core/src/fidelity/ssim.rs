use crate::error::{Error, Result};
use crate::media::GrayImage;

pub const WINDOW: usize = 11;
pub const SIGMA: f64 = 1.5;
pub const K1: f64 = 0.01;
pub const K2: f64 = 0.03;
pub const DATA_RANGE: f64 = 255.0;

/// Normalised 1-D Gaussian taps; the 2-D window is their outer product.
pub fn gaussian_taps() -> [f64; WINDOW] {
    let r = (WINDOW / 2) as f64;
    let mut t = [0.0; WINDOW];
    for (i, v) in t.iter_mut().enumerate() {
        let d = i as f64 - r;
        *v = (-d * d / (2.0 * SIGMA * SIGMA)).exp();
    }
    let s: f64 = t.iter().sum();
    t.iter_mut().for_each(|v| *v /= s);
    t
}

/// Weighted local mean over every fully contained window ("valid" region).
fn filter_valid(src: &[f64], w: usize, h: usize, taps: &[f64; WINDOW]) -> Vec<f64> {
    let ow = w - WINDOW + 1;
    let oh = h - WINDOW + 1;
    let mut tmp = vec![0.0; ow * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..ow {
            tmp[y * ow + x] = taps.iter().zip(&row[x..x + WINDOW]).map(|(t, v)| t * v).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = taps.iter().enumerate().map(|(k, t)| t * tmp[(y + k) * ow + x]).sum();
        }
    }
    out
}

/// Single-scale SSIM clamped to `[0, 1]`, the form used as a fidelity term.
pub fn ssim(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    Ok(ssim_index(a, b)?.clamp(0.0, 1.0))
}

/// Single-scale SSIM, mean over the valid map. Lies in `[-1, 1]`.
pub fn ssim_index(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    if a.width != b.width || a.height != b.height {
        return Err(Error::DimensionMismatch(a.width, a.height, b.width, b.height));
    }
    if a.width < WINDOW || a.height < WINDOW {
        return Err(Error::DimensionMismatch(a.width, a.height, WINDOW, WINDOW));
    }
    let (w, h) = (a.width, a.height);
    let taps = gaussian_taps();
    let prod = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).collect::<Vec<_>>();
    let mu_a = filter_valid(&a.data, w, h, &taps);
    let mu_b = filter_valid(&b.data, w, h, &taps);
    let e_aa = filter_valid(&prod(&a.data, &a.data), w, h, &taps);
    let e_bb = filter_valid(&prod(&b.data, &b.data), w, h, &taps);
    let e_ab = filter_valid(&prod(&a.data, &b.data), w, h, &taps);
    let c1 = (K1 * DATA_RANGE).powi(2);
    let c2 = (K2 * DATA_RANGE).powi(2);
    let n = mu_a.len();
    let total: f64 = (0..n)
        .map(|i| {
            let (ma, mb) = (mu_a[i], mu_b[i]);
            let va = e_aa[i] - ma * ma;
            let vb = e_bb[i] - mb * mb;
            let cov = e_ab[i] - ma * mb;
            ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2))
        })
        .sum();
    Ok(total / n as f64)
}
