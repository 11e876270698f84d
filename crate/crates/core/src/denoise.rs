//! Scanner-noise removal that leaves legitimate small marks alone.

use serde::{Deserialize, Serialize};

use crate::raster::{connected_components, BinaryImage, GrayImage};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DenoiseConfig {
    /// Odd median window; `None` skips the median pass.
    pub median_window: Option<usize>,
    /// Components smaller than `alpha` × median component area are specks.
    pub area_factor_alpha: f64,
    pub dot_protect: bool,
}

impl Default for DenoiseConfig {
    fn default() -> Self {
        DenoiseConfig { median_window: Some(3), area_factor_alpha: 0.05, dot_protect: true }
    }
}

impl DenoiseConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(w) = self.median_window {
            if w < 3 || w % 2 == 0 {
                return Err(Error::InvalidConfig(format!("median window must be odd and >= 3, got {w}")));
            }
        }
        if !(self.area_factor_alpha >= 0.0 && self.area_factor_alpha < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "speck alpha must lie in [0, 1), got {}",
                self.area_factor_alpha
            )));
        }
        Ok(())
    }
}

/// Median of the clipped `window`×`window` neighbourhood (lower median for
/// even counts).
pub fn median_filter(img: &GrayImage, window: usize) -> GrayImage {
    let half = window / 2;
    let (w, h) = (img.width(), img.height());
    let mut buf = Vec::with_capacity(window * window);
    let mut out = GrayImage::new(w, h, 0);
    for y in 0..h {
        let (y0, y1) = (y.saturating_sub(half), (y + half).min(h - 1));
        for x in 0..w {
            let (x0, x1) = (x.saturating_sub(half), (x + half).min(w - 1));
            buf.clear();
            for yy in y0..=y1 {
                buf.extend_from_slice(&img.data()[yy * w + x0..=yy * w + x1]);
            }
            let mid = (buf.len() - 1) / 2;
            let (_, m, _) = buf.select_nth_unstable(mid);
            out.set(x, y, *m);
        }
    }
    out
}

/// Median filter of a binary image through its 0/255 rendering.
pub fn median_binary(img: &BinaryImage, window: usize) -> BinaryImage {
    median_filter(&img.to_gray(), window).threshold_below(128)
}

/// Drops every one-pixel component.
pub fn remove_single_pixels(img: &BinaryImage) -> BinaryImage {
    BinaryImage::from_fn(img.width(), img.height(), |x, y| img.is_ink(x, y) && img.ink_neighbors(x, y) > 0)
}

/// One synchronous pass of 3×3 smoothing: background with ≥ 6 ink
/// neighbours fills, ink with ≤ 1 ink neighbour clears.
pub fn smooth_staircase(img: &BinaryImage) -> BinaryImage {
    BinaryImage::from_fn(img.width(), img.height(), |x, y| {
        let n = img.ink_neighbors(x, y);
        if img.is_ink(x, y) {
            n > 1
        } else {
            n >= 6
        }
    })
}

/// Smallest area among components whose bbox width and height both fall in
/// `[0.15·H, 0.5·H]`, `H` being the median component height.
pub fn estimate_dot_size(img: &BinaryImage) -> Option<usize> {
    let comps = connected_components(img);
    let mut heights: Vec<usize> = comps.iter().map(|c| c.bbox.h).collect();
    if heights.is_empty() {
        return None;
    }
    heights.sort_unstable();
    let h = heights[(heights.len() - 1) / 2] as f64;
    let (lo, hi) = (0.15 * h, 0.5 * h);
    let in_range = |v: usize| (v as f64) >= lo && (v as f64) <= hi;
    comps.iter().filter(|c| in_range(c.bbox.w) && in_range(c.bbox.h)).map(|c| c.pixel_count).min()
}

/// Removes components whose area is below `alpha` × the median area.
/// With `dot_protect`, anything at least as large as the estimated dot size
/// survives regardless.
pub fn remove_background_components(img: &BinaryImage, cfg: &DenoiseConfig) -> BinaryImage {
    let comps = connected_components(img);
    if comps.is_empty() {
        return img.clone();
    }
    let mut areas: Vec<usize> = comps.iter().map(|c| c.pixel_count).collect();
    areas.sort_unstable();
    let median = areas[(areas.len() - 1) / 2] as f64;
    let cutoff = cfg.area_factor_alpha * median;
    let protect = if cfg.dot_protect { estimate_dot_size(img) } else { None };
    let mut out = img.clone();
    for c in comps {
        let protected = protect.is_some_and(|d| c.pixel_count >= d);
        if !protected && (c.pixel_count as f64) < cutoff {
            for &(x, y) in &c.pixels {
                out.set(x, y, false);
            }
        }
    }
    out
}

/// The full binary denoise stage: median, single-pixel removal, staircase
/// smoothing, then statistical speck removal.
pub fn denoise_binary(img: &BinaryImage, cfg: &DenoiseConfig) -> Result<BinaryImage> {
    cfg.validate()?;
    let mut cur = match cfg.median_window {
        Some(w) => median_binary(img, w),
        None => img.clone(),
    };
    cur = remove_single_pixels(&cur);
    cur = smooth_staircase(&cur);
    Ok(remove_background_components(&cur, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_uniform_and_salt() {
        let img = GrayImage::new(6, 5, 42);
        assert_eq!(median_filter(&img, 3), img);
        let mut salt = GrayImage::new(5, 5, 0);
        salt.set(2, 2, 255);
        assert_eq!(median_filter(&salt, 3).get(2, 2), 0);
    }

    #[test]
    fn single_pixels() {
        let mut img = BinaryImage::new(6, 6);
        img.set(1, 1, true);
        img.set(4, 3, true);
        img.set(5, 4, true);
        let out = remove_single_pixels(&img);
        assert!(!out.is_ink(1, 1));
        assert!(out.is_ink(4, 3) && out.is_ink(5, 4));
    }

    #[test]
    fn staircase_rules() {
        let rect = BinaryImage::from_fn(10, 10, |x, y| (2..8).contains(&x) && (2..8).contains(&y));
        assert_eq!(smooth_staircase(&rect), rect);
        // notch pixel with six ink neighbours
        let mut notched = BinaryImage::from_fn(12, 6, |x, y| y >= 2 || (y == 1 && x == 5));
        notched.set(5, 2, false);
        assert_eq!(notched.ink_neighbors(5, 2), 6);
        assert!(smooth_staircase(&notched).is_ink(5, 2));
        // five neighbours stay background
        let mut shallow = BinaryImage::from_fn(12, 6, |_, y| y >= 2);
        shallow.set(5, 2, false);
        assert!(!smooth_staircase(&shallow).is_ink(5, 2));
    }

    #[test]
    fn lone_component_survives() {
        let img = BinaryImage::from_fn(6, 6, |x, y| x < 2 && y < 2);
        let out = remove_background_components(&img, &DenoiseConfig::default());
        assert_eq!(out, img);
    }

    #[test]
    fn alpha_zero_is_identity() {
        let img = BinaryImage::from_fn(20, 20, |x, y| (x * 7 + y * 3) % 11 == 0 || (x < 9 && y < 9));
        let cfg = DenoiseConfig { area_factor_alpha: 0.0, dot_protect: false, ..Default::default() };
        assert_eq!(remove_background_components(&img, &cfg), img);
    }
}
