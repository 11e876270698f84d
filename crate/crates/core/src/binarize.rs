//! Grayscale to ink/background conversion.
//!
//! Every method uses the strict rule "ink iff intensity < T", so uniform
//! regions fall to background.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::raster::{connected_components, BinaryImage, GrayImage, IntegralTables};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlobalThresholdConfig {
    pub threshold: u8,
}

impl Default for GlobalThresholdConfig {
    fn default() -> Self {
        GlobalThresholdConfig { threshold: 128 }
    }
}

/// Sliding-window parameters shared by Niblack and Sauvola.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalThresholdConfig {
    /// Odd window side, at least 3.
    pub window: usize,
    pub k: f64,
    /// Dynamic range of the standard deviation (Sauvola only).
    pub r: f64,
}

impl LocalThresholdConfig {
    pub fn niblack_default() -> Self {
        LocalThresholdConfig { window: 15, k: -0.2, r: 128.0 }
    }

    pub fn sauvola_default() -> Self {
        LocalThresholdConfig { window: 15, k: 0.34, r: 128.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window < 3 || self.window.is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!("window must be odd and >= 3, got {}", self.window)));
        }
        if !(self.r > 0.0) {
            return Err(Error::InvalidConfig(format!("R must be > 0, got {}", self.r)));
        }
        Ok(())
    }

    fn half(&self) -> usize {
        (self.window - 1) / 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
#[derive(Default)]
pub enum BinarizeMethod {
    Global(GlobalThresholdConfig),
    #[default]
    Otsu,
    Niblack(LocalThresholdConfig),
    AdaptiveNiblack,
    Sauvola(LocalThresholdConfig),
}

impl BinarizeMethod {
    pub fn apply(&self, img: &GrayImage) -> Result<BinaryImage> {
        match self {
            BinarizeMethod::Global(cfg) => Ok(global_fixed(img, *cfg)),
            BinarizeMethod::Otsu => otsu(img),
            BinarizeMethod::Niblack(cfg) => niblack(img, cfg),
            BinarizeMethod::AdaptiveNiblack => adaptive_niblack(img),
            BinarizeMethod::Sauvola(cfg) => sauvola(img, cfg),
        }
    }
}

/// Ink iff intensity < threshold.
pub fn global_fixed(img: &GrayImage, cfg: GlobalThresholdConfig) -> BinaryImage {
    img.threshold_below(u16::from(cfg.threshold))
}

// Exact comparison of a/b and c/d for non-negative integers, b, d > 0,
// without forming the cross products.
fn cmp_fractions(mut a: u128, mut b: u128, mut c: u128, mut d: u128) -> Ordering {
    loop {
        let (qa, ra) = (a / b, a % b);
        let (qc, rc) = (c / d, c % d);
        if qa != qc {
            return qa.cmp(&qc);
        }
        match (ra == 0, rc == 0) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            // ra/b < rc/d  <=>  d/rc < b/ra
            (false, false) => (a, b, c, d) = (d, rc, b, ra),
        }
    }
}

/// Threshold `T ∈ [0, 254]` maximising the between-class variance, with
/// class 0 = pixels ≤ T. Ties resolve to the smallest `T`.
///
/// The criterion is evaluated exactly: up to a constant factor,
/// `ω₀ω₁(μ₀ − μ₁)² = (N·S₀ − S·n₀)² / (n₀·n₁)`, an integer ratio.
pub fn otsu_threshold(img: &GrayImage) -> Result<u8> {
    let mut hist = [0u64; 256];
    for &v in img.data() {
        hist[v as usize] += 1;
    }
    if hist.iter().filter(|&&c| c > 0).count() < 2 {
        return Err(Error::UniformImage);
    }
    let total = img.data().len() as u128;
    let sum: u128 = hist.iter().enumerate().map(|(v, &c)| v as u128 * c as u128).sum();
    let (mut n0, mut s0) = (0u128, 0u128);
    let mut best = (0u8, 0u128, 1u128);
    for t in 0..255usize {
        n0 += hist[t] as u128;
        s0 += t as u128 * hist[t] as u128;
        let n1 = total - n0;
        let (num, den) = if n0 == 0 || n1 == 0 {
            (0, 1)
        } else {
            let diff = (total * s0).abs_diff(sum * n0);
            (diff * diff, n0 * n1)
        };
        if cmp_fractions(num, den, best.1, best.2) == Ordering::Greater {
            best = (t as u8, num, den);
        }
    }
    Ok(best.0)
}

/// Otsu binarization: pixels ≤ T become ink.
pub fn otsu(img: &GrayImage) -> Result<BinaryImage> {
    let t = otsu_threshold(img)?;
    Ok(img.threshold_below(u16::from(t) + 1))
}

fn local_threshold(img: &GrayImage, cfg: &LocalThresholdConfig, rule: impl Fn(f64, f64) -> f64) -> Result<BinaryImage> {
    cfg.validate()?;
    let tables = IntegralTables::new(img);
    let half = cfg.half();
    Ok(BinaryImage::from_fn(img.width(), img.height(), |x, y| {
        let s = tables.stats(x, y, half);
        f64::from(img.get(x, y)) < rule(s.mean, s.stddev)
    }))
}

/// `T = m + k·s` over the local window.
pub fn niblack(img: &GrayImage, cfg: &LocalThresholdConfig) -> Result<BinaryImage> {
    let k = cfg.k;
    local_threshold(img, cfg, |m, s| m + k * s)
}

/// `T = m·(1 + k·(s/R − 1))` over the local window.
pub fn sauvola(img: &GrayImage, cfg: &LocalThresholdConfig) -> Result<BinaryImage> {
    let (k, r) = (cfg.k, cfg.r);
    local_threshold(img, cfg, |m, s| m * (1.0 + k * (s / r - 1.0)))
}

/// Window and `k` picked from the image itself.
///
/// A provisional Otsu pass gives the character scale `H` (median height of
/// components with at least 4 pixels). The window is the smallest odd size
/// ≥ `2H + 1`, clamped to `[15, 201]`; `k = −0.2·min(1, s/64)` where `s` is
/// the whole-image standard deviation, so low-contrast pages get a softer
/// offset.
pub fn adaptive_niblack_params(img: &GrayImage) -> Result<LocalThresholdConfig> {
    let provisional = otsu(img)?;
    let mut heights: Vec<usize> =
        connected_components(&provisional).iter().filter(|c| c.pixel_count >= 4).map(|c| c.bbox.h).collect();
    heights.sort_unstable();
    let h = if heights.is_empty() { 0 } else { heights[(heights.len() - 1) / 2] };
    let mut window = 2 * h + 1;
    if window % 2 == 0 {
        window += 1;
    }
    let window = window.clamp(15, 201);

    let n = img.data().len() as u64;
    let sum: u64 = img.data().iter().map(|&v| u64::from(v)).sum();
    let sum_sq: u64 = img.data().iter().map(|&v| u64::from(v) * u64::from(v)).sum();
    let s_global = crate::raster::WindowStats::from_moments(n, sum, sum_sq).stddev;
    let k = -0.2 * (s_global / 64.0).min(1.0);
    log::debug!("adaptive niblack: char height {h}, window {window}, k {k:.4}");
    Ok(LocalThresholdConfig { window, k, r: 128.0 })
}

pub fn adaptive_niblack(img: &GrayImage) -> Result<BinaryImage> {
    let cfg = adaptive_niblack_params(img)?;
    niblack(img, &cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fractions() {
        assert_eq!(cmp_fractions(1, 3, 2, 6), Ordering::Equal);
        assert_eq!(cmp_fractions(1, 3, 1, 4), Ordering::Greater);
        assert_eq!(cmp_fractions(7, 5, 10, 7), Ordering::Less);
        assert_eq!(cmp_fractions(0, 1, 1, 1000), Ordering::Less);
        assert_eq!(cmp_fractions(u128::MAX, 3, u128::MAX - 1, 3), Ordering::Greater);
    }

    #[test]
    fn global_extremes() {
        let img = GrayImage::from_fn(4, 4, |x, y| (x * 60 + y) as u8);
        assert_eq!(global_fixed(&img, GlobalThresholdConfig { threshold: 0 }).ink_count(), 0);
        let black = GrayImage::new(3, 3, 0);
        assert_eq!(global_fixed(&black, GlobalThresholdConfig { threshold: 255 }).ink_count(), 9);
    }

    #[test]
    fn otsu_two_level_tie() {
        let img = GrayImage::from_fn(10, 10, |x, _| if x < 5 { 0 } else { 255 });
        assert_eq!(otsu_threshold(&img).unwrap(), 0);
        let b = otsu(&img).unwrap();
        assert_eq!(b.ink_count(), 50);
    }

    #[test]
    fn otsu_bimodal() {
        let img = GrayImage::from_fn(20, 10, |x, _| if x < 10 { 30 } else { 220 });
        let b = otsu(&img).unwrap();
        for y in 0..10 {
            for x in 0..20 {
                assert_eq!(b.is_ink(x, y), x < 10);
            }
        }
    }

    #[test]
    fn uniform_errors() {
        let img = GrayImage::new(5, 5, 90);
        assert!(matches!(otsu_threshold(&img), Err(Error::UniformImage)));
        assert!(matches!(otsu(&img), Err(Error::UniformImage)));
        assert!(matches!(adaptive_niblack(&img), Err(Error::UniformImage)));
    }

    #[test]
    fn local_uniform_is_background() {
        let img = GrayImage::new(9, 9, 100);
        assert_eq!(niblack(&img, &LocalThresholdConfig::niblack_default()).unwrap().ink_count(), 0);
        assert_eq!(sauvola(&img, &LocalThresholdConfig::sauvola_default()).unwrap().ink_count(), 0);
    }

    #[test]
    fn k_zero_degenerates_to_local_mean() {
        let img = GrayImage::from_fn(12, 9, |x, y| ((x * 37 + y * 91) % 256) as u8);
        let cfg = LocalThresholdConfig { window: 5, k: 0.0, r: 128.0 };
        let a = niblack(&img, &cfg).unwrap();
        let b = sauvola(&img, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_even_window() {
        let img = GrayImage::new(5, 5, 1);
        let cfg = LocalThresholdConfig { window: 4, ..LocalThresholdConfig::niblack_default() };
        assert!(matches!(niblack(&img, &cfg), Err(Error::InvalidConfig(_))));
    }
}
