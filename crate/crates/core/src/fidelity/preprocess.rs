use crate::error::{Error, Result};
use crate::media::{GrayImage, RgbImage};

/// Side of the square evaluation raster.
pub const EVAL_SIDE: usize = 224;

pub fn luma(rgb: &RgbImage) -> GrayImage {
    let data = rgb
        .data
        .chunks_exact(3)
        .map(|p| 0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64)
        .collect();
    GrayImage::new(rgb.width as usize, rgb.height as usize, data)
}

/// Bilinear resample with half-pixel centres and edge clamping.
pub fn resize_bilinear(src: &GrayImage, w: usize, h: usize) -> GrayImage {
    if src.width == w && src.height == h {
        return src.clone();
    }
    let sx = src.width as f64 / w as f64;
    let sy = src.height as f64 / h as f64;
    let axis = |i: usize, scale: f64, n: usize| {
        let c = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, (n - 1) as f64);
        let i0 = c.floor() as usize;
        let i1 = (i0 + 1).min(n - 1);
        (i0, i1, c - i0 as f64)
    };
    let cols: Vec<_> = (0..w).map(|x| axis(x, sx, src.width)).collect();
    let rows: Vec<_> = (0..h).map(|y| axis(y, sy, src.height)).collect();
    GrayImage::from_fn(w, h, |x, y| {
        let (x0, x1, fx) = cols[x];
        let (y0, y1, fy) = rows[y];
        let top = src.at(x0, y0) * (1.0 - fx) + src.at(x1, y0) * fx;
        let bot = src.at(x0, y1) * (1.0 - fx) + src.at(x1, y1) * fx;
        top * (1.0 - fy) + bot * fy
    })
}

/// Rec.601 luma followed by a bilinear resize to 224x224.
pub fn preprocess(rgb: &RgbImage) -> Result<GrayImage> {
    if rgb.width == 0 || rgb.height == 0 {
        return Err(Error::EmptyImage);
    }
    Ok(resize_bilinear(&luma(rgb), EVAL_SIDE, EVAL_SIDE))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gray_224_is_unchanged() {
        let mut rgb = RgbImage::filled(224, 224, 0);
        for (i, px) in rgb.data.chunks_exact_mut(3).enumerate() {
            px.fill((i * 7 % 256) as u8);
        }
        let g = preprocess(&rgb).unwrap();
        for (i, &v) in g.data.iter().enumerate() {
            assert!((v - (i * 7 % 256) as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_resizes_to_constant() {
        let g = preprocess(&RgbImage::filled(448, 448, 100)).unwrap();
        assert!(g.data.iter().all(|&v| (v - 100.0).abs() < 1e-9));
        let g = preprocess(&RgbImage::filled(13, 301, 100)).unwrap();
        assert!(g.data.iter().all(|&v| (v - 100.0).abs() < 1e-9));
    }

    #[test]
    fn pure_red_luma() {
        let mut rgb = RgbImage::filled(224, 224, 0);
        for px in rgb.data.chunks_exact_mut(3) {
            px[0] = 255;
        }
        let g = preprocess(&rgb).unwrap();
        assert!(g.data.iter().all(|&v| (v - 76.245).abs() < 1e-9));
    }

    #[test]
    fn empty_image_is_an_error() {
        assert!(matches!(preprocess(&RgbImage::filled(0, 5, 0)), Err(Error::EmptyImage)));
    }

    #[test]
    fn downscale_by_two_averages_pairs() {
        let src = GrayImage::from_fn(4, 1, |x, _| (x * 10) as f64);
        let d = resize_bilinear(&src, 2, 1);
        assert_eq!(d.data, vec![5.0, 25.0]);
    }
}
