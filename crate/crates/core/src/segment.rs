//! Line, word and character segmentation for headline (matra) scripts.
//!
//! Lines and words come from zero runs in row and column ink histograms.
//! Inside a word the headline is located as the densest row band and erased,
//! which leaves the characters of the middle zone topologically separate.
//! Pieces that fail to reach the baseline cannot be whole characters and are
//! joined to their right neighbour. Marks above the headline and below the
//! baseline are extracted by depth-first search and attached to the
//! character they overlap most.

use serde::{Deserialize, Serialize};

use crate::raster::{check_region, column_histogram, row_histogram, BinaryImage, Rect, RowSpan};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentConfig {
    /// Rows with more than this many ink pixels belong to a line.
    pub blank_row_tolerance: usize,
    /// Word gaps must span at least `max(2, beta × line height)` columns;
    /// `beta = 0` splits at every blank column.
    pub word_gap_factor: f64,
    /// Rows within this fraction of the peak extend the headline.
    pub matra_extend: f64,
    /// A piece reaching within this many rows of the baseline is a character.
    pub baseline_tolerance: usize,
    /// Middle-zone glyphs narrower than this fraction of the middle-zone
    /// height count as modifiers.
    pub modifier_width_ratio: f64,
}

impl Default for SegmentConfig {
    fn default() -> Self {
        SegmentConfig {
            blank_row_tolerance: 0,
            word_gap_factor: 0.25,
            matra_extend: 0.85,
            baseline_tolerance: 2,
            modifier_width_ratio: 0.5,
        }
    }
}

impl SegmentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.word_gap_factor) {
            return Err(Error::InvalidConfig(format!("beta must lie in [0, 1), got {}", self.word_gap_factor)));
        }
        if !(self.matra_extend > 0.0 && self.matra_extend <= 1.0) {
            return Err(Error::InvalidConfig(format!("gamma must lie in (0, 1], got {}", self.matra_extend)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZoneClass {
    Base,
    UpperModifier,
    MiddleModifier,
    LowerModifier,
    UpperMiddleModifier,
}

impl ZoneClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            ZoneClass::Base => "base",
            ZoneClass::UpperModifier => "upper_modifier",
            ZoneClass::MiddleModifier => "middle_modifier",
            ZoneClass::LowerModifier => "lower_modifier",
            ZoneClass::UpperMiddleModifier => "upper_middle_modifier",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Glyph {
    pub bbox: Rect,
    pub zone_class: ZoneClass,
    pub pixels: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Word {
    pub bbox: Rect,
    pub matra: Option<RowSpan>,
    pub glyphs: Vec<Glyph>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TextLine {
    pub bbox: Rect,
    pub matra: Option<RowSpan>,
    pub baseline: usize,
    pub words: Vec<Word>,
}

/// Row boundaries used to classify a glyph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Zones {
    pub matra: Option<RowSpan>,
    /// First middle-zone row (below the headline, or the word top).
    pub middle_top: usize,
    pub baseline: usize,
}

/// Maximal runs of `true` as inclusive index pairs.
fn runs(flags: impl IntoIterator<Item = bool>) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    let mut last = 0;
    for (i, f) in flags.into_iter().enumerate() {
        match (f, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push((s, i - 1));
                start = None;
            }
            _ => {}
        }
        last = i;
    }
    if let Some(s) = start {
        out.push((s, last));
    }
    out
}

/// Text lines of `block`: maximal row runs whose ink count exceeds `tau`,
/// tightened to their ink columns. Runs under 3 rows are dropped.
pub fn segment_lines(img: &BinaryImage, block: Rect, cfg: &SegmentConfig) -> Result<Vec<Rect>> {
    let hist = row_histogram(img, block)?;
    let mut lines = Vec::new();
    for (a, b) in runs(hist.iter().map(|&c| c > cfg.blank_row_tolerance)) {
        if b - a + 1 < 3 {
            continue;
        }
        let band = Rect::new(block.x, block.y + a, block.w, b - a + 1);
        if let Some(ink) = img.ink_bounds(band) {
            lines.push(Rect::new(ink.x, band.y, ink.w, band.h));
        }
    }
    Ok(lines)
}

/// Words of a line. Only blank column runs at least `max(2, beta·h)` wide
/// separate words: narrower gaps occur inside words wherever a glyph without
/// a headline interrupts the headline.
pub fn segment_words(img: &BinaryImage, line: Rect, cfg: &SegmentConfig) -> Result<Vec<Rect>> {
    let hist = column_histogram(img, line)?;
    let min_gap = if cfg.word_gap_factor == 0.0 { 1.0 } else { (cfg.word_gap_factor * line.h as f64).max(2.0) };
    let inked = runs(hist.iter().map(|&c| c > 0));
    let mut spans: Vec<(usize, usize)> = Vec::new();
    for (a, b) in inked {
        match spans.last_mut() {
            Some(last) if ((a - last.1 - 1) as f64) < min_gap => last.1 = b,
            _ => spans.push((a, b)),
        }
    }
    Ok(spans
        .into_iter()
        .filter_map(|(a, b)| img.ink_bounds(Rect::new(line.x + a, line.y, b - a + 1, line.h)))
        .collect())
}

/// Headline rows of a word or line: the densest row (topmost on ties)
/// extended over adjacent rows holding at least `gamma` of its count.
/// Absent when the densest row covers less than half the region width.
pub fn detect_matra(img: &BinaryImage, region: Rect, cfg: &SegmentConfig) -> Result<Option<RowSpan>> {
    let hist = row_histogram(img, region)?;
    let (peak_row, &peak) =
        hist.iter().enumerate().rev().max_by_key(|&(_, c)| *c).expect("region has at least one row");
    if peak == 0 || (peak as f64) < 0.5 * region.w as f64 {
        return Ok(None);
    }
    let keep = |c: usize| c as f64 >= cfg.matra_extend * peak as f64;
    let mut top = peak_row;
    while top > 0 && keep(hist[top - 1]) {
        top -= 1;
    }
    let mut bottom = peak_row;
    while bottom + 1 < hist.len() && keep(hist[bottom + 1]) {
        bottom += 1;
    }
    Ok(Some(RowSpan::new(region.y + top, region.y + bottom)))
}

/// Row where the middle zone ends: the steepest fall of the row histogram
/// in the lower half of the line. When no fall reaches 30% of the peak
/// row count the line has no lower zone and the baseline is its last row.
pub fn detect_baseline(img: &BinaryImage, line: Rect, _cfg: &SegmentConfig) -> Result<usize> {
    let hist = row_histogram(img, line)?;
    let last = line.last_row();
    if hist.len() < 4 {
        return Ok(last);
    }
    let peak = *hist.iter().max().expect("non-empty") as f64;
    let mut best: Option<(usize, i64)> = None;
    for b in hist.len() / 2..hist.len() - 1 {
        let drop = hist[b] as i64 - hist[b + 1] as i64;
        if best.is_none_or(|(_, d)| drop > d) {
            best = Some((b, drop));
        }
    }
    match best {
        Some((b, d)) if d as f64 >= 0.3 * peak => Ok(line.y + b),
        _ => Ok(last),
    }
}

/// 8-connected components of the ink inside `region`, found by iterative
/// depth-first search.
fn dfs_components(img: &BinaryImage, region: Rect) -> Vec<Vec<(usize, usize)>> {
    let mut seen = vec![false; region.area()];
    let idx = |x: usize, y: usize| (y - region.y) * region.w + (x - region.x);
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for y in region.y..region.bottom() {
        for x in region.x..region.right() {
            if !img.is_ink(x, y) || seen[idx(x, y)] {
                continue;
            }
            let mut comp = Vec::new();
            seen[idx(x, y)] = true;
            stack.push((x, y));
            while let Some((cx, cy)) = stack.pop() {
                comp.push((cx, cy));
                for ny in cy.saturating_sub(1).max(region.y)..=(cy + 1).min(region.last_row()) {
                    for nx in cx.saturating_sub(1).max(region.x)..=(cx + 1).min(region.last_col()) {
                        if img.is_ink(nx, ny) && !seen[idx(nx, ny)] {
                            seen[idx(nx, ny)] = true;
                            stack.push((nx, ny));
                        }
                    }
                }
            }
            out.push(comp);
        }
    }
    out
}

struct Piece {
    cols: (usize, usize),
    pixels: Vec<(usize, usize)>,
    from_middle: bool,
}

impl Piece {
    fn reaches(&self, baseline: usize, tol: usize) -> bool {
        self.pixels.iter().any(|&(_, y)| y + tol >= baseline)
    }

    fn absorb(&mut self, other: Piece) {
        self.cols = (self.cols.0.min(other.cols.0), self.cols.1.max(other.cols.1));
        self.pixels.extend(other.pixels);
    }

    fn overlap(&self, cols: (usize, usize)) -> usize {
        (self.cols.1.min(cols.1) + 1).saturating_sub(self.cols.0.max(cols.0))
    }
}

fn attach(pieces: &mut Vec<Piece>, extra: Vec<Vec<(usize, usize)>>) {
    for comp in extra {
        let x0 = comp.iter().map(|p| p.0).min().expect("non-empty");
        let x1 = comp.iter().map(|p| p.0).max().expect("non-empty");
        let best = pieces
            .iter()
            .enumerate()
            .filter(|(_, p)| p.from_middle)
            .map(|(i, p)| (i, p.overlap((x0, x1))))
            .filter(|&(_, o)| o > 0)
            .fold(None::<(usize, usize)>, |acc, (i, o)| match acc {
                Some((_, bo)) if bo >= o => acc,
                _ => Some((i, o)),
            });
        match best {
            Some((i, _)) => pieces[i].pixels.extend(comp),
            None => pieces.push(Piece { cols: (x0, x1), pixels: comp, from_middle: false }),
        }
    }
}

/// Splits a word into glyphs.
///
/// `word` should span the full line height so that `baseline` lies inside
/// it. Headline rows are left out of every glyph.
pub fn segment_characters(
    img: &BinaryImage,
    word: Rect,
    matra: Option<RowSpan>,
    baseline: usize,
    cfg: &SegmentConfig,
) -> Result<Vec<Glyph>> {
    check_region(word, img.width(), img.height())?;
    if baseline < word.y || baseline > word.last_row() {
        return Err(Error::InvalidBaseline { baseline, top: word.y, bottom: word.last_row() });
    }
    let middle_top = matra.map_or(word.y, |m| (m.bottom + 1).max(word.y));
    let mut pieces: Vec<Piece> = Vec::new();

    if middle_top <= baseline {
        let middle = Rect::new(word.x, middle_top, word.w, baseline - middle_top + 1);
        let cols = column_histogram(img, middle)?;
        let mut pending: Option<Piece> = None;
        for (a, b) in runs(cols.iter().map(|&c| c > 0)) {
            let mut pixels = Vec::new();
            for y in middle.y..middle.bottom() {
                for x in word.x + a..=word.x + b {
                    if img.is_ink(x, y) {
                        pixels.push((x, y));
                    }
                }
            }
            let mut piece = Piece { cols: (word.x + a, word.x + b), pixels, from_middle: true };
            if let Some(p) = pending.take() {
                piece.absorb(p);
            }
            if piece.reaches(baseline, cfg.baseline_tolerance) {
                pieces.push(piece);
            } else {
                pending = Some(piece);
            }
        }
        if let Some(p) = pending {
            match pieces.last_mut() {
                Some(last) => last.absorb(p),
                None => pieces.push(p),
            }
        }
    }

    if baseline < word.last_row() {
        let lower = Rect::new(word.x, baseline + 1, word.w, word.last_row() - baseline);
        attach(&mut pieces, dfs_components(img, lower));
    }
    if let Some(m) = matra {
        if m.top > word.y {
            let upper = Rect::new(word.x, word.y, word.w, m.top - word.y);
            attach(&mut pieces, dfs_components(img, upper));
        }
    }

    let zones = Zones { matra, middle_top, baseline };
    let mut glyphs: Vec<Glyph> = pieces
        .into_iter()
        .filter_map(|mut p| {
            p.pixels.sort_unstable_by_key(|&(x, y)| (y, x));
            let bbox = Rect::bounding(p.pixels.iter().copied())?;
            let zone_class = classify_glyph_zone_with(&p.pixels, &zones, cfg.modifier_width_ratio);
            Some(Glyph { bbox, zone_class, pixels: p.pixels })
        })
        .collect();
    glyphs.sort_by_key(|g| (g.bbox.x, g.bbox.y));
    Ok(glyphs)
}

/// Zone-occupancy class of a glyph.
///
/// With `U`, `M`, `L` meaning ink above the headline, in the middle zone and
/// below the baseline, and "thin" meaning the middle-zone ink is narrower
/// than half the middle-zone height:
/// thin `M` alone is a middle modifier, `L` alone a lower modifier, `U` with
/// thin `M` an upper-middle modifier, `U` alone an upper modifier; anything
/// else, including a wide character carrying marks, is a base glyph.
pub fn classify_glyph_zone(pixels: &[(usize, usize)], zones: &Zones) -> ZoneClass {
    classify_glyph_zone_with(pixels, zones, SegmentConfig::default().modifier_width_ratio)
}

fn classify_glyph_zone_with(pixels: &[(usize, usize)], zones: &Zones, ratio: f64) -> ZoneClass {
    let upper_end = zones.matra.map(|m| m.top);
    let (mut u, mut l) = (false, false);
    let mut middle_cols: Option<(usize, usize)> = None;
    for &(x, y) in pixels {
        if upper_end.is_some_and(|t| y < t) {
            u = true;
        } else if y > zones.baseline {
            l = true;
        } else if y >= zones.middle_top {
            middle_cols = Some(middle_cols.map_or((x, x), |(a, b)| (a.min(x), b.max(x))));
        }
    }
    let m = middle_cols.is_some();
    let zone_height = (zones.baseline + 1).saturating_sub(zones.middle_top) as f64;
    let thin = middle_cols.is_some_and(|(a, b)| ((b - a + 1) as f64) < ratio * zone_height);
    match (u, m, l) {
        (false, true, false) if thin => ZoneClass::MiddleModifier,
        (false, false, true) => ZoneClass::LowerModifier,
        (true, true, false) if thin => ZoneClass::UpperMiddleModifier,
        (true, false, false) => ZoneClass::UpperModifier,
        _ => ZoneClass::Base,
    }
}

/// Baseline, headline, words and glyphs of one detected line.
pub fn segment_line(img: &BinaryImage, line: Rect, cfg: &SegmentConfig) -> Result<TextLine> {
    let baseline = detect_baseline(img, line, cfg)?;
    let matra = detect_matra(img, line, cfg)?.filter(|m| m.bottom < baseline);
    let mut words = Vec::new();
    for bbox in segment_words(img, line, cfg)? {
        let wmatra = detect_matra(img, bbox, cfg)?.filter(|m| m.bottom < baseline);
        let region = Rect::new(bbox.x, line.y, bbox.w, line.h);
        let glyphs = segment_characters(img, region, wmatra, baseline, cfg)?;
        words.push(Word { bbox, matra: wmatra, glyphs });
    }
    Ok(TextLine { bbox: line, matra, baseline, words })
}

pub fn segment_block(img: &BinaryImage, block: Rect, cfg: &SegmentConfig) -> Result<Vec<TextLine>> {
    cfg.validate()?;
    segment_lines(img, block, cfg)?.into_iter().map(|l| segment_line(img, l, cfg)).collect()
}
