//! Image representations and the low-level operations every stage consumes.
//!
//! Coordinates follow the usual raster convention: origin at the top-left,
//! `x` grows rightward and `y` grows downward. Pixels are stored row-major.

mod components;
mod histogram;
mod integral;
mod pgm;
mod rotate;

use serde::{Deserialize, Serialize};

pub use components::{connected_components, label_components, Component, Labeling};
pub use histogram::{column_histogram, row_histogram};
pub use integral::{window_stats, IntegralTables, WindowStats};
pub use pgm::{load_pgm, save_pgm};
pub use rotate::{rotate_binary, rotate_gray, rotated_size, RotationFrame};

/// Intensity used for background when sampling outside an image.
pub const BACKGROUND: u8 = 255;

/// BT.601 luma, rounded half-up and clamped to `[0, 255]`.
pub fn gray_from_rgb(r: u8, g: u8, b: u8) -> u8 {
    let luma = 0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b);
    (luma + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// Axis-aligned rectangle, half-open on the right and bottom. Serializes as
/// `[x, y, w, h]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[usize; 4]", into = "[usize; 4]")]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl From<[usize; 4]> for Rect {
    fn from([x, y, w, h]: [usize; 4]) -> Self {
        Rect { x, y, w, h }
    }
}

impl From<Rect> for [usize; 4] {
    fn from(r: Rect) -> Self {
        [r.x, r.y, r.w, r.h]
    }
}

impl Rect {
    pub const fn new(x: usize, y: usize, w: usize, h: usize) -> Self {
        Rect { x, y, w, h }
    }

    /// Builds a rect from inclusive corner coordinates.
    pub fn from_corners(x0: usize, y0: usize, x1: usize, y1: usize) -> Self {
        Rect::new(x0, y0, x1 - x0 + 1, y1 - y0 + 1)
    }

    /// Exclusive right edge.
    pub fn right(&self) -> usize {
        self.x + self.w
    }

    /// Exclusive bottom edge.
    pub fn bottom(&self) -> usize {
        self.y + self.h
    }

    pub fn last_row(&self) -> usize {
        self.y + self.h - 1
    }

    pub fn last_col(&self) -> usize {
        self.x + self.w - 1
    }

    pub fn area(&self) -> usize {
        self.w * self.h
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x && x < self.right() && y >= self.y && y < self.bottom()
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        other.x >= self.x && other.y >= self.y && other.right() <= self.right() && other.bottom() <= self.bottom()
    }

    pub fn intersects(&self, other: &Rect) -> bool {
        self.x < other.right() && other.x < self.right() && self.y < other.bottom() && other.y < self.bottom()
    }

    pub fn intersection_area(&self, other: &Rect) -> usize {
        let x0 = self.x.max(other.x);
        let x1 = self.right().min(other.right());
        let y0 = self.y.max(other.y);
        let y1 = self.bottom().min(other.bottom());
        x1.saturating_sub(x0) * y1.saturating_sub(y0)
    }

    pub fn union(&self, other: &Rect) -> Rect {
        let x0 = self.x.min(other.x);
        let y0 = self.y.min(other.y);
        let x1 = self.right().max(other.right());
        let y1 = self.bottom().max(other.bottom());
        Rect::new(x0, y0, x1 - x0, y1 - y0)
    }

    /// Intersection over union.
    pub fn iou(&self, other: &Rect) -> f64 {
        let inter = self.intersection_area(other);
        let union = self.area() + other.area() - inter;
        if union == 0 {
            0.0
        } else {
            inter as f64 / union as f64
        }
    }

    /// Number of columns shared with `other`.
    pub fn column_overlap(&self, other: &Rect) -> usize {
        self.right().min(other.right()).saturating_sub(self.x.max(other.x))
    }

    pub fn fits_in(&self, width: usize, height: usize) -> bool {
        self.w >= 1 && self.h >= 1 && self.right() <= width && self.bottom() <= height
    }

    /// Tight bound of a set of pixel coordinates.
    pub fn bounding(pixels: impl IntoIterator<Item = (usize, usize)>) -> Option<Rect> {
        let mut it = pixels.into_iter();
        let (fx, fy) = it.next()?;
        let (mut x0, mut y0, mut x1, mut y1) = (fx, fy, fx, fy);
        for (x, y) in it {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        Some(Rect::from_corners(x0, y0, x1, y1))
    }
}

/// Inclusive span of rows, serialized as `[top, bottom]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct RowSpan {
    pub top: usize,
    pub bottom: usize,
}

impl From<[usize; 2]> for RowSpan {
    fn from([top, bottom]: [usize; 2]) -> Self {
        RowSpan { top, bottom }
    }
}

impl From<RowSpan> for [usize; 2] {
    fn from(s: RowSpan) -> Self {
        [s.top, s.bottom]
    }
}

impl RowSpan {
    pub fn new(top: usize, bottom: usize) -> Self {
        debug_assert!(top <= bottom);
        RowSpan { top, bottom }
    }

    pub fn contains(&self, row: usize) -> bool {
        row >= self.top && row <= self.bottom
    }

    pub fn height(&self) -> usize {
        self.bottom - self.top + 1
    }
}

/// 8-bit grayscale raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, fill: u8) -> Self {
        assert!(width >= 1 && height >= 1, "image dimensions must be >= 1");
        GrayImage { width, height, data: vec![fill; width * height] }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<u8>) -> Option<Self> {
        (width >= 1 && height >= 1 && data.len() == width * height).then_some(GrayImage { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> u8) -> Self {
        let mut img = GrayImage::new(width, height, 0);
        for y in 0..height {
            for x in 0..width {
                img.data[y * width + x] = f(x, y);
            }
        }
        img
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.data[y * self.width + x] = v;
    }

    pub fn bounds(&self) -> Rect {
        Rect::new(0, 0, self.width, self.height)
    }

    pub fn fill_rect(&mut self, r: Rect, v: u8) {
        for y in r.y..r.bottom().min(self.height) {
            for x in r.x..r.right().min(self.width) {
                self.data[y * self.width + x] = v;
            }
        }
    }

    /// Pixels strictly darker than `threshold` become ink.
    pub fn threshold_below(&self, threshold: u16) -> BinaryImage {
        BinaryImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| u16::from(v) < threshold).collect(),
        }
    }
}

/// Two-valued raster; `true` is ink (dark foreground).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize) -> Self {
        assert!(width >= 1 && height >= 1, "image dimensions must be >= 1");
        BinaryImage { width, height, data: vec![false; width * height] }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<bool>) -> Option<Self> {
        (width >= 1 && height >= 1 && data.len() == width * height).then_some(BinaryImage { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut img = BinaryImage::new(width, height);
        for y in 0..height {
            for x in 0..width {
                img.data[y * width + x] = f(x, y);
            }
        }
        img
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn bounds(&self) -> Rect {
        Rect::new(0, 0, self.width, self.height)
    }

    pub fn is_ink(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    /// Ink test with out-of-range coordinates reading as background.
    pub fn ink_at(&self, x: isize, y: isize) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.data[y as usize * self.width + x as usize]
    }

    pub fn set(&mut self, x: usize, y: usize, ink: bool) {
        self.data[y * self.width + x] = ink;
    }

    pub fn ink_count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn ink_in(&self, r: Rect) -> usize {
        (r.y..r.bottom()).map(|y| (r.x..r.right()).filter(|&x| self.is_ink(x, y)).count()).sum()
    }

    /// Number of ink pixels among the 8 neighbours of `(x, y)`.
    pub fn ink_neighbors(&self, x: usize, y: usize) -> usize {
        let (x, y) = (x as isize, y as isize);
        let mut n = 0;
        for dy in -1..=1 {
            for dx in -1..=1 {
                if (dx != 0 || dy != 0) && self.ink_at(x + dx, y + dy) {
                    n += 1;
                }
            }
        }
        n
    }

    /// Tight bound of the ink inside `region`, if any.
    pub fn ink_bounds(&self, region: Rect) -> Option<Rect> {
        let mut b: Option<(usize, usize, usize, usize)> = None;
        for y in region.y..region.bottom() {
            for x in region.x..region.right() {
                if self.is_ink(x, y) {
                    b = Some(match b {
                        None => (x, y, x, y),
                        Some((x0, y0, x1, y1)) => (x0.min(x), y0.min(y), x1.max(x), y1.max(y)),
                    });
                }
            }
        }
        b.map(|(x0, y0, x1, y1)| Rect::from_corners(x0, y0, x1, y1))
    }

    /// Renders ink as 0 and background as 255.
    pub fn to_gray(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&b| if b { 0 } else { 255 }).collect(),
        }
    }

    pub fn and(&self, other: &BinaryImage) -> BinaryImage {
        assert_eq!((self.width, self.height), (other.width, other.height));
        BinaryImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().zip(&other.data).map(|(a, b)| *a && *b).collect(),
        }
    }

    pub fn transpose(&self) -> BinaryImage {
        BinaryImage::from_fn(self.height, self.width, |x, y| self.is_ink(y, x))
    }
}

pub(crate) fn check_region(r: Rect, width: usize, height: usize) -> crate::Result<()> {
    if r.fits_in(width, height) {
        Ok(())
    } else {
        Err(crate::Error::RegionOutOfBounds(r, width, height))
    }
}
