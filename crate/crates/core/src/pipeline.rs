//! Scan-to-glyphs orchestration, JSON results and debug artifacts.
//!
//! Stage order: binarize, denoise, estimate skew and correct it on the
//! grayscale page (then binarize and denoise again), layout, and per text
//! block line/word/character segmentation.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::binarize::BinarizeMethod;
use crate::denoise::{denoise_binary, DenoiseConfig};
use crate::deskew::{deskew_page, estimate_skew, SkewConfig, SkewEstimate};
use crate::layout::{analyze, Block, BlockKind, LayoutConfig, PageLayout};
use crate::raster::{save_pgm, BinaryImage, GrayImage, Rect, RowSpan};
use crate::segment::{segment_block, SegmentConfig, TextLine, ZoneClass};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct StageFlags {
    pub denoise: bool,
    pub deskew: bool,
    pub layout: bool,
    pub segment: bool,
}

impl Default for StageFlags {
    fn default() -> Self {
        StageFlags { denoise: true, deskew: true, layout: true, segment: true }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub binarize: BinarizeMethod,
    pub denoise: DenoiseConfig,
    pub skew: SkewConfig,
    pub layout: LayoutConfig,
    pub segment: SegmentConfig,
    pub debug_dir: Option<PathBuf>,
    pub stages: StageFlags,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        match &self.binarize {
            BinarizeMethod::Niblack(c) | BinarizeMethod::Sauvola(c) => c.validate()?,
            _ => {}
        }
        self.denoise.validate()?;
        self.skew.validate()?;
        self.segment.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PageResult {
    pub source: String,
    pub skew: SkewEstimate,
    pub layout: PageLayout,
    /// Lines of each block, parallel to `layout.blocks`; empty for non-text.
    pub lines: Vec<Vec<TextLine>>,
    /// Wall time per stage in milliseconds.
    pub timings: BTreeMap<String, f64>,
}

/// Images produced along the way, kept for debug dumps.
#[derive(Debug, Clone)]
pub struct Intermediates {
    pub gray: GrayImage,
    pub binary: BinaryImage,
    pub denoised: BinaryImage,
    /// Binary image that layout and segmentation ran on.
    pub deskewed: BinaryImage,
    pub rlsa: BinaryImage,
}

fn binarize_stage(gray: &GrayImage, method: &BinarizeMethod) -> Result<BinaryImage> {
    match method.apply(gray) {
        Ok(b) => Ok(b),
        // a flat page has no ink to separate
        Err(Error::UniformImage) => Ok(BinaryImage::new(gray.width(), gray.height())),
        Err(e) => Err(e.in_stage("binarize")),
    }
}

fn denoise_stage(img: &BinaryImage, cfg: &PipelineConfig) -> Result<BinaryImage> {
    if cfg.stages.denoise {
        denoise_binary(img, &cfg.denoise).map_err(|e| e.in_stage("denoise"))
    } else {
        Ok(img.clone())
    }
}

struct Clock(BTreeMap<String, f64>);

impl Clock {
    fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        let ms = start.elapsed().as_secs_f64() * 1e3;
        *self.0.entry(stage.to_string()).or_insert(0.0) += ms;
        out
    }
}

pub fn run_pipeline(gray: &GrayImage, cfg: &PipelineConfig) -> Result<PageResult> {
    run_pipeline_with_images(gray, cfg).map(|(r, _)| r)
}

pub fn run_pipeline_with_images(gray: &GrayImage, cfg: &PipelineConfig) -> Result<(PageResult, Intermediates)> {
    cfg.validate()?;
    let mut clock = Clock(BTreeMap::new());

    let binary = clock.time("binarize", || binarize_stage(gray, &cfg.binarize))?;
    let denoised = clock.time("denoise", || denoise_stage(&binary, cfg))?;

    let (skew, work) = if cfg.stages.deskew {
        let est = clock.time("deskew", || match estimate_skew(&denoised, cfg.skew.max_angle, cfg.skew.step) {
            Ok(e) => Ok(e),
            Err(Error::EmptyImage | Error::InsufficientInk) => Ok(SkewEstimate::zero()),
            Err(e) => Err(e.in_stage("deskew")),
        })?;
        if est.theta_degrees != 0.0 {
            let rotated = clock.time("deskew", || deskew_page(gray, &est));
            let b = clock.time("binarize", || binarize_stage(&rotated, &cfg.binarize))?;
            let d = clock.time("denoise", || denoise_stage(&b, cfg))?;
            (est, d)
        } else {
            (est, denoised.clone())
        }
    } else {
        (SkewEstimate::zero(), denoised.clone())
    };

    let (layout, rlsa) =
        clock.time("layout", || if cfg.stages.layout { analyze(&work, &cfg.layout) } else { whole_page(&work) });

    let lines = clock.time("segment", || {
        layout
            .blocks
            .iter()
            .map(|b| match b.kind {
                BlockKind::Text if cfg.stages.segment => segment_block(&work, b.bbox, &cfg.segment),
                _ => Ok(Vec::new()),
            })
            .collect::<Result<Vec<_>>>()
            .map_err(|e| e.in_stage("segment"))
    })?;

    let result = PageResult { source: String::new(), skew, layout, lines, timings: clock.0 };
    let images = Intermediates { gray: gray.clone(), binary, denoised, deskewed: work, rlsa };
    if let Some(dir) = &cfg.debug_dir {
        dump_debug(&result, &images, dir)?;
    }
    Ok((result, images))
}

/// The whole ink extent as a single text block.
fn whole_page(img: &BinaryImage) -> (PageLayout, BinaryImage) {
    let blocks = img
        .ink_bounds(img.bounds())
        .map(|bbox| Block {
            bbox,
            kind: BlockKind::Text,
            ink_density: img.ink_in(bbox) as f64 / bbox.area() as f64,
            mean_run: 0.0,
        })
        .into_iter()
        .collect();
    (PageLayout { blocks, page_size: (img.width(), img.height()) }, img.clone())
}

fn round4(v: f64) -> f64 {
    (v * 1e4).round() / 1e4 + 0.0
}

fn rect_array(r: &Rect) -> [usize; 4] {
    [r.x, r.y, r.w, r.h]
}

fn span_array(s: &Option<RowSpan>) -> Option<[usize; 2]> {
    s.map(|s| [s.top, s.bottom])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkewRecord {
    pub theta: f64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlyphRecord {
    pub bbox: [usize; 4],
    pub zone_class: ZoneClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordRecord {
    pub bbox: [usize; 4],
    pub matra: Option<[usize; 2]>,
    pub glyphs: Vec<GlyphRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineRecord {
    pub bbox: [usize; 4],
    pub matra: Option<[usize; 2]>,
    pub baseline: usize,
    pub words: Vec<WordRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockRecord {
    pub bbox: [usize; 4],
    pub kind: BlockKind,
    pub lines: Vec<LineRecord>,
}

/// Serialized form of a [`PageResult`]; field order is the output key order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageRecord {
    pub source: String,
    pub skew: SkewRecord,
    pub blocks: Vec<BlockRecord>,
    pub timings: BTreeMap<String, f64>,
}

impl From<&PageResult> for PageRecord {
    fn from(r: &PageResult) -> Self {
        let line = |l: &TextLine| LineRecord {
            bbox: rect_array(&l.bbox),
            matra: span_array(&l.matra),
            baseline: l.baseline,
            words: l
                .words
                .iter()
                .map(|w| WordRecord {
                    bbox: rect_array(&w.bbox),
                    matra: span_array(&w.matra),
                    glyphs: w
                        .glyphs
                        .iter()
                        .map(|g| GlyphRecord { bbox: rect_array(&g.bbox), zone_class: g.zone_class })
                        .collect(),
                })
                .collect(),
        };
        PageRecord {
            source: r.source.clone(),
            skew: SkewRecord { theta: round4(r.skew.theta_degrees), score: round4(r.skew.score) },
            blocks: r
                .layout
                .blocks
                .iter()
                .enumerate()
                .map(|(i, b)| BlockRecord {
                    bbox: rect_array(&b.bbox),
                    kind: b.kind,
                    lines: r.lines.get(i).map_or_else(Vec::new, |ls| ls.iter().map(line).collect()),
                })
                .collect(),
            timings: r.timings.iter().map(|(k, v)| (k.clone(), round4(*v))).collect(),
        }
    }
}

impl PageRecord {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("records always serialize");
        s.push('\n');
        s
    }
}

/// Canonical pretty JSON with LF line endings and at most 4 decimals.
pub fn emit_json(result: &PageResult) -> String {
    PageRecord::from(result).to_json()
}

fn draw_outline(img: &mut GrayImage, r: &Rect, level: u8) {
    if r.w == 0 || r.h == 0 {
        return;
    }
    for x in r.x..r.right() {
        img.set(x, r.y, level);
        img.set(x, r.last_row(), level);
    }
    for y in r.y..r.bottom() {
        img.set(r.x, y, level);
        img.set(r.last_col(), y, level);
    }
}

/// The working binary with line, word and glyph boxes drawn at gray
/// levels 64, 128 and 192.
pub fn overlay(result: &PageResult, work: &BinaryImage) -> GrayImage {
    let mut img = work.to_gray();
    let lines = result.lines.iter().flatten();
    for l in lines.clone() {
        draw_outline(&mut img, &l.bbox, 64);
    }
    for w in lines.clone().flat_map(|l| &l.words) {
        draw_outline(&mut img, &w.bbox, 128);
    }
    for g in lines.flat_map(|l| &l.words).flat_map(|w| &w.glyphs) {
        draw_outline(&mut img, &g.bbox, 192);
    }
    img
}

/// Writes `bytes` to `path` through a temporary sibling and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn dump_debug(result: &PageResult, images: &Intermediates, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let files = [
        ("01-gray.pgm", images.gray.clone()),
        ("02-binary.pgm", images.binary.to_gray()),
        ("03-denoised.pgm", images.denoised.to_gray()),
        ("04-deskewed.pgm", images.deskewed.to_gray()),
        ("05-rlsa.pgm", images.rlsa.to_gray()),
        ("06-overlay.pgm", overlay(result, &images.deskewed)),
    ];
    for (name, img) in files {
        write_atomic(&dir.join(name), &save_pgm(&img))?;
    }
    Ok(())
}

/// Writes every glyph as a cropped PGM numbered in reading order.
/// Returns the number of files written.
pub fn dump_glyphs(result: &PageResult, work: &BinaryImage, dir: &Path) -> Result<usize> {
    fs::create_dir_all(dir)?;
    let glyphs = result.lines.iter().flatten().flat_map(|l| &l.words).flat_map(|w| &w.glyphs);
    let mut n = 0;
    for g in glyphs {
        let b = g.bbox;
        let mut crop = GrayImage::new(b.w, b.h, 255);
        for &(x, y) in &g.pixels {
            crop.set(x - b.x, y - b.y, 0);
        }
        debug_assert!(b.fits_in(work.width(), work.height()));
        n += 1;
        write_atomic(&dir.join(format!("glyph_{n:05}.pgm")), &save_pgm(&crop))?;
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthgen::{render_page, PageSpec};

    #[test]
    fn blank_page_has_no_blocks() {
        let r = run_pipeline(&GrayImage::new(60, 40, 255), &PipelineConfig::default()).unwrap();
        assert!(r.layout.blocks.is_empty());
        let json = emit_json(&r);
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["blocks"], serde_json::json!([]));
        let pos: Vec<usize> =
            ["\"source\"", "\"skew\"", "\"blocks\"", "\"timings\""].iter().map(|k| json.find(k).unwrap()).collect();
        assert!(pos.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn clean_page_counts() {
        let spec = PageSpec { lines: 4, seed: 5, ..Default::default() };
        let (img, truth) = render_page(&spec).unwrap();
        let r = run_pipeline(&img, &PipelineConfig::default()).unwrap();
        let lines: Vec<&TextLine> = r.lines.iter().flatten().collect();
        assert_eq!(lines.len(), truth.lines.len());
        for (l, t) in lines.iter().zip(&truth.lines) {
            assert_eq!(l.words.len(), t.words.len());
            for (w, tw) in l.words.iter().zip(&t.words) {
                assert_eq!(w.glyphs.len(), tw.glyphs.len());
            }
        }
    }

    #[test]
    fn json_round_trip_and_determinism() {
        let spec = PageSpec { lines: 3, seed: 2, ..Default::default() };
        let (img, _) = render_page(&spec).unwrap();
        let cfg = PipelineConfig::default();
        let mut a = run_pipeline(&img, &cfg).unwrap();
        let mut b = run_pipeline(&img, &cfg).unwrap();
        a.timings.clear();
        b.timings.clear();
        assert_eq!(emit_json(&a), emit_json(&b));
        let rec: PageRecord = serde_json::from_str(&emit_json(&a)).unwrap();
        assert_eq!(rec, PageRecord::from(&a));
        assert!(!emit_json(&a).contains('\r'));
    }

    #[test]
    fn deskew_flag_keeps_binarization() {
        let spec = PageSpec { lines: 3, skew: 3.0, ..Default::default() };
        let (img, _) = render_page(&spec).unwrap();
        let on = run_pipeline_with_images(&img, &PipelineConfig::default()).unwrap().1;
        let cfg = PipelineConfig { stages: StageFlags { deskew: false, ..Default::default() }, ..Default::default() };
        let off = run_pipeline_with_images(&img, &cfg).unwrap().1;
        assert_eq!(on.binary, off.binary);
        assert_eq!(on.denoised, off.denoised);
    }

    #[test]
    fn debug_files_written() {
        let dir = tempfile::tempdir().unwrap();
        let spec = PageSpec { lines: 2, ..Default::default() };
        let (img, _) = render_page(&spec).unwrap();
        let cfg = PipelineConfig { debug_dir: Some(dir.path().to_path_buf()), ..Default::default() };
        let r = run_pipeline(&img, &cfg).unwrap();
        for name in ["01-gray", "02-binary", "03-denoised", "04-deskewed", "05-rlsa", "06-overlay"] {
            let bytes = fs::read(dir.path().join(format!("{name}.pgm"))).unwrap();
            crate::raster::load_pgm(&bytes).unwrap();
        }
        let over = crate::raster::load_pgm(&fs::read(dir.path().join("06-overlay.pgm")).unwrap()).unwrap();
        for g in r.lines.iter().flatten().flat_map(|l| &l.words).flat_map(|w| &w.glyphs) {
            assert_eq!(over.get(g.bbox.x, g.bbox.y), 192);
            assert_eq!(over.get(g.bbox.last_col(), g.bbox.last_row()), 192);
        }
        assert!(over.data().contains(&64) && over.data().contains(&128));
    }
}
