//! Page layout analysis by run-length smoothing (RLSA).
//!
//! The page is smeared horizontally and vertically, the two results are
//! ANDed and re-smeared horizontally with a short threshold. That yields one
//! solid blob per text line. A final vertical smear closes the gaps between
//! consecutive lines so that paragraphs and columns come out as single
//! blocks. Blobs are then boxed and classified as text or non-text.

use serde::{Deserialize, Serialize};

use crate::raster::{check_region, connected_components, BinaryImage, Rect};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    Horizontal,
    Vertical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    Text,
    NonText,
}

impl BlockKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BlockKind::Text => "text",
            BlockKind::NonText => "non_text",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub bbox: Rect,
    pub kind: BlockKind,
    pub ink_density: f64,
    pub mean_run: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageLayout {
    pub blocks: Vec<Block>,
    pub page_size: (usize, usize),
}

/// Explicit smear thresholds; `None` derives them from the page.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LayoutConfig {
    pub rlsa_h: Option<usize>,
    pub rlsa_v: Option<usize>,
}

/// Smallest smeared blob kept as a block.
pub const MIN_BLOCK_PIXELS: usize = 50;

fn smear_line(line: &mut [bool], c: usize) {
    let mut last_ink: Option<usize> = None;
    for i in 0..line.len() {
        if line[i] {
            if let Some(p) = last_ink {
                let gap = i - p - 1;
                if gap > 0 && gap <= c {
                    line[p + 1..i].iter_mut().for_each(|v| *v = true);
                }
            }
            last_ink = Some(i);
        }
    }
}

/// Fills every background run of length ≤ `c` lying strictly between two
/// ink pixels along `axis`. Runs touching the border stay empty.
pub fn rlsa_smear(img: &BinaryImage, c: usize, axis: Axis) -> BinaryImage {
    match axis {
        Axis::Horizontal => {
            let mut data = img.data().to_vec();
            for row in data.chunks_mut(img.width()) {
                smear_line(row, c);
            }
            BinaryImage::from_vec(img.width(), img.height(), data).expect("same size")
        }
        Axis::Vertical => rlsa_smear(&img.transpose(), c, Axis::Horizontal).transpose(),
    }
}

/// Median height of the page's connected components.
pub fn estimate_line_height(img: &BinaryImage) -> Option<usize> {
    let mut h: Vec<usize> = connected_components(img).iter().map(|c| c.bbox.h).collect();
    if h.is_empty() {
        return None;
    }
    h.sort_unstable();
    Some(h[(h.len() - 1) / 2])
}

/// Horizontal and vertical smear thresholds derived from the line height:
/// `C_h = 5·H` clamped to `[20, 300]`, `C_v = 2·H` clamped to `[10, 120]`.
pub fn default_thresholds(img: &BinaryImage) -> (usize, usize) {
    let h = estimate_line_height(img).unwrap_or(0) as f64;
    let ch = (0.5 * h * 10.0).round().clamp(20.0, 300.0) as usize;
    let cv = (2.0 * h).round().clamp(10.0, 120.0) as usize;
    (ch, cv)
}

/// The smoothed mask whose blobs become blocks.
pub fn rlsa_mask(img: &BinaryImage, c_h: usize, c_v: usize) -> BinaryImage {
    let h = rlsa_smear(img, c_h, Axis::Horizontal);
    let v = rlsa_smear(img, c_v, Axis::Vertical);
    let joined = rlsa_smear(&h.and(&v), c_h / 4, Axis::Horizontal);
    rlsa_smear(&joined, c_v, Axis::Vertical)
}

fn horizontal_runs(img: &BinaryImage, region: Rect) -> Vec<usize> {
    let mut runs = Vec::new();
    for y in region.y..region.bottom() {
        let mut run = 0;
        for x in region.x..region.right() {
            if img.is_ink(x, y) {
                run += 1;
            } else if run > 0 {
                runs.push(run);
                run = 0;
            }
        }
        if run > 0 {
            runs.push(run);
        }
    }
    runs
}

/// Median horizontal ink run over the whole page.
pub fn estimate_stroke_width(img: &BinaryImage) -> f64 {
    let mut runs = horizontal_runs(img, img.bounds());
    if runs.is_empty() {
        return 0.0;
    }
    runs.sort_unstable();
    runs[(runs.len() - 1) / 2] as f64
}

fn block_stats(img: &BinaryImage, bbox: Rect) -> (f64, f64) {
    let density = img.ink_in(bbox) as f64 / bbox.area() as f64;
    let runs = horizontal_runs(img, bbox);
    let mean_run = if runs.is_empty() { 0.0 } else { runs.iter().sum::<usize>() as f64 / runs.len() as f64 };
    (density, mean_run)
}

fn classify_with(img: &BinaryImage, bbox: Rect, stroke: f64) -> Block {
    let (density, mean_run) = block_stats(img, bbox);
    let text = mean_run < 4.0 * stroke && (0.05..=0.6).contains(&density);
    Block { bbox, kind: if text { BlockKind::Text } else { BlockKind::NonText }, ink_density: density, mean_run }
}

/// Text iff the mean horizontal run is under four stroke widths and the ink
/// density lies in `[0.05, 0.6]`.
pub fn classify_block(img: &BinaryImage, bbox: Rect) -> Result<BlockKind> {
    check_region(bbox, img.width(), img.height())?;
    Ok(classify_with(img, bbox, estimate_stroke_width(img)).kind)
}

fn merge_overlapping(mut rects: Vec<Rect>) -> Vec<Rect> {
    loop {
        let mut merged = false;
        'outer: for i in 0..rects.len() {
            for j in i + 1..rects.len() {
                if rects[i].intersects(&rects[j]) {
                    let r = rects.swap_remove(j);
                    rects[i] = rects[i].union(&r);
                    merged = true;
                    break 'outer;
                }
            }
        }
        if !merged {
            return rects;
        }
    }
}

pub fn rlsa_segment(img: &BinaryImage, c_h: usize, c_v: usize) -> PageLayout {
    let mask = rlsa_mask(img, c_h, c_v);
    layout_from_mask(img, &mask)
}

/// Blocks from an already smoothed mask.
pub fn layout_from_mask(img: &BinaryImage, mask: &BinaryImage) -> PageLayout {
    let rects: Vec<Rect> =
        connected_components(mask).into_iter().filter(|c| c.pixel_count >= MIN_BLOCK_PIXELS).map(|c| c.bbox).collect();
    let mut rects = merge_overlapping(rects);
    rects.sort_by_key(|r| (r.y, r.x));
    let stroke = estimate_stroke_width(img);
    PageLayout {
        blocks: rects.into_iter().map(|r| classify_with(img, r, stroke)).collect(),
        page_size: (img.width(), img.height()),
    }
}

/// Layout with thresholds from `cfg`, falling back to page-derived ones.
pub fn analyze(img: &BinaryImage, cfg: &LayoutConfig) -> (PageLayout, BinaryImage) {
    let (dh, dv) = default_thresholds(img);
    let mask = rlsa_mask(img, cfg.rlsa_h.unwrap_or(dh), cfg.rlsa_v.unwrap_or(dv));
    (layout_from_mask(img, &mask), mask)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(bits: &[u8]) -> BinaryImage {
        BinaryImage::from_vec(bits.len(), 1, bits.iter().map(|&b| b == 1).collect()).unwrap()
    }

    #[test]
    fn smear_rule() {
        let r = row(&[1, 0, 0, 1]);
        assert_eq!(rlsa_smear(&r, 2, Axis::Horizontal).ink_count(), 4);
        assert_eq!(rlsa_smear(&r, 1, Axis::Horizontal), r);
        let border = row(&[0, 1, 0, 1, 0]);
        assert_eq!(rlsa_smear(&border, 10, Axis::Horizontal), row(&[0, 1, 1, 1, 0]));
        let col = row(&[1, 0, 1]).transpose();
        assert_eq!(rlsa_smear(&col, 1, Axis::Vertical).ink_count(), 3);
    }

    #[test]
    fn empty_page_has_no_blocks() {
        let img = BinaryImage::new(50, 40);
        assert!(rlsa_segment(&img, 20, 10).blocks.is_empty());
    }

    #[test]
    fn solid_and_empty_are_non_text() {
        let img = BinaryImage::from_fn(40, 40, |x, y| x < 20 && y < 20);
        assert_eq!(classify_block(&img, Rect::new(0, 0, 20, 20)).unwrap(), BlockKind::NonText);
        assert_eq!(classify_block(&img, Rect::new(25, 25, 10, 10)).unwrap(), BlockKind::NonText);
    }

    #[test]
    fn merge_makes_disjoint() {
        let rs = merge_overlapping(vec![Rect::new(0, 0, 5, 5), Rect::new(20, 0, 5, 5), Rect::new(4, 4, 17, 2)]);
        assert_eq!(rs, vec![Rect::new(0, 0, 25, 6)]);
    }
}
