//! Skew estimation from the upper envelope and correction by rotation.
//!
//! The estimator is a discrete Radon transform restricted to envelope
//! points: for each candidate angle the points are projected onto the axis
//! normal to lines of that slope and binned at one pixel. Matra rows
//! collapse into a few tall bins at the true angle, which the sum of
//! squared bin counts rewards.

use serde::{Deserialize, Serialize};

use crate::raster::{label_components, rotate_binary, rotate_gray, BinaryImage, GrayImage};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkewConfig {
    pub max_angle: f64,
    pub step: f64,
}

impl Default for SkewConfig {
    fn default() -> Self {
        SkewConfig { max_angle: 15.0, step: 0.1 }
    }
}

impl SkewConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.max_angle > 0.0 && self.max_angle <= 45.0) {
            return Err(Error::InvalidConfig(format!("max skew must lie in (0, 45], got {}", self.max_angle)));
        }
        if !(self.step > 0.0 && self.step <= 1.0) {
            return Err(Error::InvalidConfig(format!("skew step must lie in (0, 1], got {}", self.step)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkewEstimate {
    pub theta_degrees: f64,
    /// Peak energy over mean energy of the profile; 0 when nothing was swept.
    pub score: f64,
    /// `(angle, energy)` for each swept angle, ascending.
    pub profile: Vec<(f64, f64)>,
}

impl SkewEstimate {
    pub fn zero() -> Self {
        SkewEstimate { theta_degrees: 0.0, score: 0.0, profile: Vec::new() }
    }
}

/// Topmost ink pixel of each column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Envelope {
    pub points: Vec<(usize, usize)>,
}

/// Upper envelope, skipping columns whose topmost pixel belongs to a
/// component of fewer than 4 pixels.
pub fn upper_envelope(img: &BinaryImage) -> Result<Envelope> {
    let labels = label_components(img);
    if labels.is_empty() {
        return Err(Error::EmptyImage);
    }
    let mut points = Vec::new();
    for x in 0..img.width() {
        if let Some(y) = (0..img.height()).find(|&y| img.is_ink(x, y)) {
            let l = labels.label(x, y) as usize;
            if labels.sizes[l - 1] >= 4 {
                points.push((x, y));
            }
        }
    }
    Ok(Envelope { points })
}

fn projection_energy(points: &[(f64, f64)], angle: f64, bins: &mut Vec<u32>) -> f64 {
    let (s, c) = if angle == 0.0 { (0.0, 1.0) } else { angle.to_radians().sin_cos() };
    let rhos: Vec<i64> = points.iter().map(|&(x, y)| (y * c - x * s).round() as i64).collect();
    let lo = *rhos.iter().min().expect("non-empty");
    let hi = *rhos.iter().max().expect("non-empty");
    bins.clear();
    bins.resize((hi - lo + 1) as usize, 0);
    for r in rhos {
        bins[(r - lo) as usize] += 1;
    }
    bins.iter().map(|&b| f64::from(b) * f64::from(b)).sum()
}

/// Angle in `[−max_angle, max_angle]` (multiples of `step`) maximising
/// envelope projection energy; ties go to the smaller |angle|, then to the
/// negative side.
pub fn estimate_skew(img: &BinaryImage, max_angle: f64, step: f64) -> Result<SkewEstimate> {
    SkewConfig { max_angle, step }.validate()?;
    let env = upper_envelope(img)?;
    if env.points.len() < 2 {
        return Err(Error::InsufficientInk);
    }
    // Coordinates relative to the envelope's corner keep binning exact under
    // translation.
    let x0 = env.points.iter().map(|p| p.0).min().expect("non-empty");
    let y0 = env.points.iter().map(|p| p.1).min().expect("non-empty");
    let pts: Vec<(f64, f64)> = env.points.iter().map(|&(x, y)| ((x - x0) as f64, (y - y0) as f64)).collect();
    let k_max = (max_angle / step + 1e-9).floor() as i64;
    let mut bins = Vec::new();
    let profile: Vec<(f64, f64)> = (-k_max..=k_max)
        .map(|k| {
            let angle = k as f64 * step;
            (angle, projection_energy(&pts, angle, &mut bins))
        })
        .collect();
    let mut best = profile[k_max as usize];
    for &(a, e) in &profile {
        let better = e > best.1 || (e == best.1 && a.abs() < best.0.abs());
        if better {
            best = (a, e);
        }
    }
    let mean = profile.iter().map(|p| p.1).sum::<f64>() / profile.len() as f64;
    Ok(SkewEstimate { theta_degrees: best.0, score: if mean > 0.0 { best.1 / mean } else { 0.0 }, profile })
}

/// Rotates the grayscale page by the negated estimate.
pub fn deskew_page(gray: &GrayImage, est: &SkewEstimate) -> GrayImage {
    rotate_gray(gray, -est.theta_degrees)
}

pub fn deskew_binary(img: &BinaryImage, est: &SkewEstimate) -> BinaryImage {
    rotate_binary(img, -est.theta_degrees)
}
