//! Synthetic matra-script pages with exact ground truth.
//!
//! Glyphs are stroke patterns built from rectangles: stems, bottom bars,
//! hooks above the headline, detached dots and marks below the baseline.
//! Every glyph of a word except the matra-less ones hangs from one
//! continuous headline. Zones follow a 25/55/20 split of the nominal
//! character height `S`.
//!
//! Stems hanging from the headline are inset one column and carry a
//! one-pixel bracket in the outer column, so a 3×3 median filter rounding
//! the junction never grows a glyph past its box.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::layout::BlockKind;
use crate::raster::{rotate_gray, GrayImage, Rect, RotationFrame, RowSpan, BACKGROUND};
use crate::segment::ZoneClass;
use crate::{Error, Result};

/// Identifier of the PRNG recorded in every ground truth.
pub const GENERATOR: &str = "ChaCha8Rng";
const LAYOUT_STREAM: u64 = 0;
const NOISE_STREAM: u64 = 1;
const INK: u8 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixtureKind {
    Plain,
    Matraless,
    Dotted,
    SplitProne,
    UpperModifier,
    MiddleModifier,
    LowerModifier,
    UpperMiddleModifier,
    Descender,
}

impl FixtureKind {
    pub const ALL: [FixtureKind; 9] = [
        FixtureKind::Plain,
        FixtureKind::Matraless,
        FixtureKind::Dotted,
        FixtureKind::SplitProne,
        FixtureKind::UpperModifier,
        FixtureKind::MiddleModifier,
        FixtureKind::LowerModifier,
        FixtureKind::UpperMiddleModifier,
        FixtureKind::Descender,
    ];

    pub fn zone_class(self) -> ZoneClass {
        match self {
            FixtureKind::UpperModifier => ZoneClass::UpperModifier,
            FixtureKind::MiddleModifier => ZoneClass::MiddleModifier,
            FixtureKind::LowerModifier => ZoneClass::LowerModifier,
            FixtureKind::UpperMiddleModifier => ZoneClass::UpperMiddleModifier,
            _ => ZoneClass::Base,
        }
    }

    /// Base characters closed by a bar along the baseline.
    pub fn is_barred(self) -> bool {
        matches!(self, FixtureKind::Plain | FixtureKind::Dotted | FixtureKind::SplitProne | FixtureKind::Descender)
    }
}

/// Fractions of non-plain fixtures; the remainder is plain.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GlyphMix {
    pub matraless: f64,
    pub dotted: f64,
    pub split_prone: f64,
    pub upper_modifier: f64,
    pub middle_modifier: f64,
    pub lower_modifier: f64,
    pub upper_middle_modifier: f64,
    pub descender: f64,
}

impl GlyphMix {
    fn entries(&self) -> [(FixtureKind, f64); 8] {
        [
            (FixtureKind::Matraless, self.matraless),
            (FixtureKind::Dotted, self.dotted),
            (FixtureKind::SplitProne, self.split_prone),
            (FixtureKind::UpperModifier, self.upper_modifier),
            (FixtureKind::MiddleModifier, self.middle_modifier),
            (FixtureKind::LowerModifier, self.lower_modifier),
            (FixtureKind::UpperMiddleModifier, self.upper_middle_modifier),
            (FixtureKind::Descender, self.descender),
        ]
    }

    pub fn total(&self) -> f64 {
        self.entries().iter().map(|e| e.1).sum()
    }

    fn sample(&self, u: f64) -> FixtureKind {
        let mut acc = 0.0;
        for (kind, p) in self.entries() {
            acc += p;
            if u < acc {
                return kind;
            }
        }
        FixtureKind::Plain
    }
}

/// Inclusive count range; deserializes from a bare integer or `{min, max}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "CountRepr")]
pub struct CountRange {
    pub min: usize,
    pub max: usize,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CountRepr {
    Exact(usize),
    Range { min: usize, max: usize },
}

impl From<CountRepr> for CountRange {
    fn from(r: CountRepr) -> Self {
        match r {
            CountRepr::Exact(n) => CountRange { min: n, max: n },
            CountRepr::Range { min, max } => CountRange { min, max },
        }
    }
}

impl From<usize> for CountRange {
    fn from(n: usize) -> Self {
        CountRange { min: n, max: n }
    }
}

impl CountRange {
    pub fn new(min: usize, max: usize) -> Self {
        CountRange { min, max }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        rng.gen_range(self.min..=self.max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PageSpec {
    /// Nominal character height `S` in pixels.
    pub scale: usize,
    /// Lines per column.
    pub lines: usize,
    pub words_per_line: CountRange,
    pub glyphs_per_word: CountRange,
    pub mix: GlyphMix,
    pub columns: usize,
    /// Fixed `(width, height)`; fitted to the content when absent.
    pub page_size: Option<(usize, usize)>,
    /// Solid picture region. Lines that would overlap it are left out.
    pub image_block: Option<Rect>,
    /// Salt-and-pepper density.
    pub noise: f64,
    /// Rotation in degrees applied after the noise.
    pub skew: f64,
    pub seed: u64,
}

impl Default for PageSpec {
    fn default() -> Self {
        PageSpec {
            scale: 40,
            lines: 10,
            words_per_line: CountRange::new(2, 6),
            glyphs_per_word: CountRange::new(2, 5),
            mix: GlyphMix::default(),
            columns: 1,
            page_size: None,
            image_block: None,
            noise: 0.0,
            skew: 0.0,
            seed: 0,
        }
    }
}

impl PageSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.scale < 24 {
            return bad(format!("scale must be at least 24, got {}", self.scale));
        }
        if !(1..=2).contains(&self.columns) {
            return bad(format!("columns must be 1 or 2, got {}", self.columns));
        }
        for (name, r) in [("words_per_line", self.words_per_line), ("glyphs_per_word", self.glyphs_per_word)] {
            if r.min == 0 || r.min > r.max {
                return bad(format!("{name} range {}..={} is empty or zero", r.min, r.max));
            }
        }
        if self.mix.entries().iter().any(|e| !(0.0..=1.0).contains(&e.1)) || self.mix.total() > 1.0 + 1e-9 {
            return bad("glyph mix fractions must be non-negative and sum to at most 1".into());
        }
        if !(0.0..=1.0).contains(&self.noise) {
            return bad(format!("noise density must lie in [0, 1], got {}", self.noise));
        }
        if !(self.skew.abs() <= 45.0) {
            return bad(format!("skew must lie in [-45, 45], got {}", self.skew));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZoneProportions {
    pub upper: f64,
    pub middle: f64,
    pub lower: f64,
}

/// Absolute row boundaries of one line (pre-skew).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineZones {
    pub top: usize,
    pub matra_top: usize,
    pub middle_top: usize,
    pub baseline: usize,
    pub bottom: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthGlyph {
    pub bbox: Rect,
    pub zone_class: ZoneClass,
    pub fixture: FixtureKind,
    /// Detached dot of a dotted fixture.
    pub dot: Option<Rect>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthWord {
    pub bbox: Rect,
    pub matra: RowSpan,
    pub glyphs: Vec<TruthGlyph>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthLine {
    pub bbox: Rect,
    pub column: usize,
    pub matra: RowSpan,
    pub baseline: usize,
    pub zones: LineZones,
    /// Whether any glyph puts ink below the baseline.
    pub has_lower: bool,
    pub words: Vec<TruthWord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthBlock {
    pub bbox: Rect,
    pub kind: BlockKind,
}

/// Everything known about a rendered page. Rectangles follow the final
/// image (rotated when skew is applied); row values such as matra spans,
/// baselines and zones refer to the page before rotation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub generator: String,
    pub seed: u64,
    pub scale: usize,
    pub page_size: (usize, usize),
    pub skew_true: f64,
    pub noise_density: f64,
    pub zones: ZoneProportions,
    pub blocks: Vec<TruthBlock>,
    pub lines: Vec<TruthLine>,
    pub noise_pixels: Vec<(usize, usize)>,
}

impl GroundTruth {
    pub fn words(&self) -> impl Iterator<Item = &TruthWord> {
        self.lines.iter().flat_map(|l| l.words.iter())
    }

    pub fn glyphs(&self) -> impl Iterator<Item = &TruthGlyph> {
        self.words().flat_map(|w| w.glyphs.iter())
    }
}

/// Pixel sizes derived from the scale.
#[derive(Debug, Clone, Copy)]
struct Geometry {
    s: usize,
    stroke: usize,
    matra: usize,
    upper: usize,
    middle: usize,
    lower: usize,
    letter_gap: usize,
    word_gap: usize,
    base_width: usize,
    dot: usize,
    mark_width: usize,
    arm: usize,
    hook: usize,
    margin: usize,
    column_gap: usize,
    pitch: usize,
}

fn rnd(v: f64) -> usize {
    v.round() as usize
}

impl Geometry {
    fn new(s: usize) -> Self {
        let sf = s as f64;
        let upper = rnd(0.25 * sf);
        let middle = rnd(0.55 * sf);
        let stroke = rnd(sf / 10.0).max(3);
        Geometry {
            s,
            stroke,
            matra: rnd(sf / 12.0).max(3),
            upper,
            middle,
            lower: s - upper - middle,
            letter_gap: rnd(0.1 * sf).max(3),
            word_gap: rnd(0.4 * sf),
            base_width: rnd(0.5 * sf),
            dot: rnd(0.15 * sf).max(4),
            mark_width: rnd(0.2 * sf).max(stroke + 3),
            arm: 3,
            hook: rnd(0.7 * upper as f64).max(5),
            margin: 2 * s,
            column_gap: 3 * s,
            pitch: rnd(1.5 * sf),
        }
    }

    /// Row layout of a line whose nominal top is `t`.
    fn rows(&self, t: usize) -> Rows {
        let matra_top = t + self.upper;
        let middle_top = matra_top + self.matra;
        let baseline = t + self.upper + self.middle - 1;
        Rows {
            top: t,
            matra_top,
            middle_top,
            baseline,
            bottom: t + self.s - 1,
            lower_mark: self.lower - 2,
            arm_top: matra_top - self.hook,
        }
    }

    fn dotted_width(&self) -> usize {
        2 + 2 * self.stroke + self.dot + 4
    }
}

#[derive(Debug, Clone, Copy)]
struct Rows {
    top: usize,
    matra_top: usize,
    middle_top: usize,
    baseline: usize,
    bottom: usize,
    lower_mark: usize,
    arm_top: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct PlannedGlyph {
    kind: FixtureKind,
    width: usize,
    /// Plain glyphs alternate between a closed box and an open hook.
    hook_variant: bool,
}

#[derive(Debug, Clone)]
struct Shape {
    rects: Vec<Rect>,
    dot: Option<Rect>,
}

fn glyph_width(g: &Geometry, kind: FixtureKind, jitter: usize) -> usize {
    let base = g.base_width + jitter;
    match kind {
        FixtureKind::Plain | FixtureKind::Matraless | FixtureKind::Descender => base,
        FixtureKind::Dotted => base.max(g.dotted_width()),
        FixtureKind::SplitProne => g.stroke + 1 + g.letter_gap + base,
        FixtureKind::UpperModifier | FixtureKind::LowerModifier => g.mark_width,
        FixtureKind::MiddleModifier => g.stroke + 2,
        FixtureKind::UpperMiddleModifier => g.stroke + 3,
    }
}

/// Stems hanging from the headline, bracketed, with a bar on the baseline.
fn box_rects(g: &Geometry, r: &Rows, x0: usize, w: usize, right_stem_to: usize) -> Vec<Rect> {
    let sw = g.stroke;
    let h = r.baseline - r.middle_top + 1;
    vec![
        Rect::new(x0, r.middle_top, 1, 1),
        Rect::new(x0 + w - 1, r.middle_top, 1, 1),
        Rect::new(x0 + 1, r.middle_top, sw, h),
        Rect::new(x0 + w - 1 - sw, r.middle_top, sw, right_stem_to - r.middle_top + 1),
        Rect::new(x0 + 1, r.baseline + 1 - sw, w - 2, sw),
    ]
}

fn hook_rects(g: &Geometry, r: &Rows, x0: usize, w: usize) -> Vec<Rect> {
    let c = x0 + (w - 3) / 2;
    vec![
        Rect::new(x0, r.arm_top, w, g.arm),
        Rect::new(c, r.arm_top + g.arm - 1, 3, r.matra_top - (r.arm_top + g.arm - 1)),
    ]
}

fn hanging_stem(g: &Geometry, r: &Rows, x0: usize) -> Vec<Rect> {
    vec![
        Rect::new(x0, r.middle_top, 1, 1),
        Rect::new(x0 + 1, r.middle_top, g.stroke, r.baseline - r.middle_top + 1),
        Rect::new(x0 + 1 + g.stroke, r.middle_top, 1, 1),
    ]
}

fn glyph_shape(g: &Geometry, r: &Rows, p: &PlannedGlyph, x0: usize) -> Shape {
    let (sw, w) = (g.stroke, p.width);
    let mut dot = None;
    let rects = match p.kind {
        FixtureKind::Plain if p.hook_variant => {
            let short_top = r.middle_top + (r.baseline - r.middle_top) / 2;
            vec![
                Rect::new(x0 + w - 1, r.middle_top, 1, 1),
                Rect::new(x0 + w - 1 - sw, r.middle_top, sw, r.baseline - r.middle_top + 1),
                Rect::new(x0, r.baseline + 1 - sw, w - 1, sw),
                Rect::new(x0, short_top, sw, r.baseline - short_top + 1),
            ]
        }
        FixtureKind::Plain => box_rects(g, r, x0, w, r.baseline),
        FixtureKind::Descender => box_rects(g, r, x0, w, r.baseline + r.lower_mark),
        FixtureKind::Dotted => {
            let inner_bottom = r.baseline - sw;
            let d = Rect::new(
                x0 + (w - g.dot) / 2,
                r.middle_top + (inner_bottom - r.middle_top + 1 - g.dot) / 2,
                g.dot,
                g.dot,
            );
            dot = Some(d);
            let mut v = box_rects(g, r, x0, w, r.baseline);
            v.push(d);
            v
        }
        FixtureKind::SplitProne => {
            let len = ((r.baseline - r.middle_top + 1) * 2 / 5).max(3);
            let mut v = vec![Rect::new(x0, r.middle_top, 1, 1), Rect::new(x0 + 1, r.middle_top, sw, len)];
            let bx = x0 + 1 + sw + g.letter_gap;
            v.extend(box_rects(g, r, bx, w - (bx - x0), r.baseline));
            v
        }
        FixtureKind::Matraless => {
            let h = r.baseline - r.middle_top + 1;
            let travel = (w - sw) as f64 / 2.0;
            let mut v = Vec::with_capacity(2 * h);
            for i in 0..h {
                let off = rnd(travel * i as f64 / (h - 1) as f64);
                let y = r.middle_top + i;
                v.push(Rect::new(x0 + off, y, sw, 1));
                v.push(Rect::new(x0 + w - sw - off, y, sw, 1));
            }
            v
        }
        FixtureKind::UpperModifier => hook_rects(g, r, x0, w),
        FixtureKind::MiddleModifier => hanging_stem(g, r, x0),
        FixtureKind::UpperMiddleModifier => {
            let mut v = hanging_stem(g, r, x0);
            v.extend(hook_rects(g, r, x0, w));
            v
        }
        FixtureKind::LowerModifier => vec![Rect::new(x0, r.baseline + 1, w, r.lower_mark)],
    };
    Shape { rects, dot }
}

/// Headline segments of a word: one run per maximal sequence of glyphs
/// that carry the headline, bridging the letter gaps between them.
fn matra_rects(g: &Geometry, r: &Rows, glyphs: &[PlannedGlyph], x0: usize) -> Vec<Rect> {
    let mut out = Vec::new();
    let mut x = x0;
    let mut run: Option<(usize, usize)> = None;
    for p in glyphs {
        if p.kind == FixtureKind::Matraless {
            if let Some((a, b)) = run.take() {
                out.push(Rect::new(a, r.matra_top, b - a, g.matra));
            }
        } else {
            run = Some((run.map_or(x, |(a, _)| a), x + p.width));
        }
        x += p.width + g.letter_gap;
    }
    if let Some((a, b)) = run {
        out.push(Rect::new(a, r.matra_top, b - a, g.matra));
    }
    out
}

fn word_width(g: &Geometry, glyphs: &[PlannedGlyph]) -> usize {
    glyphs.iter().map(|p| p.width).sum::<usize>() + g.letter_gap * (glyphs.len() - 1)
}

/// Row histogram of a word drawn at line top 0.
fn word_histogram(g: &Geometry, glyphs: &[PlannedGlyph]) -> Vec<usize> {
    let r = g.rows(0);
    let w = word_width(g, glyphs);
    let mut bitmap = vec![false; w * g.s];
    let mut mark = |rect: &Rect| {
        for y in rect.y..rect.bottom() {
            for x in rect.x..rect.right() {
                bitmap[y * w + x] = true;
            }
        }
    };
    let mut x = 0;
    for p in glyphs {
        glyph_shape(g, &r, p, x).rects.iter().for_each(&mut mark);
        x += p.width + g.letter_gap;
    }
    matra_rects(g, &r, glyphs, 0).iter().for_each(&mut mark);
    bitmap.chunks(w).map(|row| row.iter().filter(|&&b| b).count()).collect()
}

/// Whether the word gives segmentation a dominant headline, a clear drop
/// at the baseline and no competing drop anywhere below the headline.
fn word_is_readable(g: &Geometry, glyphs: &[PlannedGlyph]) -> bool {
    let r = g.rows(0);
    let hist = word_histogram(g, glyphs);
    let m = hist[r.matra_top] as f64;
    let width = word_width(g, glyphs) as f64;
    let margin = if glyphs.len() > 1 { 2.0 } else { 0.0 };
    let matra_rows = r.matra_top..r.middle_top;
    if m < 0.6 * width {
        return false;
    }
    if hist.iter().enumerate().any(|(y, &c)| !matra_rows.contains(&y) && c as f64 + margin > m) {
        return false;
    }
    let drop = |b: usize| hist[b] as f64 - hist[b + 1] as f64;
    if drop(r.baseline) < 0.4 * m {
        return false;
    }
    (r.middle_top..r.bottom).all(|b| b == r.baseline || drop(b) <= 0.25 * m)
}

fn plan_word(g: &Geometry, spec: &PageSpec, rng: &mut ChaCha8Rng) -> Vec<PlannedGlyph> {
    let n = spec.glyphs_per_word.sample(rng);
    let mut glyphs: Vec<PlannedGlyph> = (0..n)
        .map(|_| {
            let kind = spec.mix.sample(rng.gen());
            let jitter = rng.gen_range(0..=g.s / 20);
            let hook_variant = rng.gen_bool(0.3);
            PlannedGlyph { kind, width: glyph_width(g, kind, jitter), hook_variant }
        })
        .collect();
    let to_plain = |p: &mut PlannedGlyph| {
        p.kind = FixtureKind::Plain;
        p.width = p.width.max(g.base_width).min(g.base_width + g.s / 20);
    };
    if !glyphs.iter().any(|p| p.kind.is_barred()) {
        to_plain(&mut glyphs[0]);
    }
    let mut unbarred = glyphs.iter().filter(|p| !p.kind.is_barred()).count();
    for p in glyphs.iter_mut().rev() {
        if 2 * unbarred <= n {
            break;
        }
        if !p.kind.is_barred() {
            to_plain(p);
            unbarred -= 1;
        }
    }
    while !word_is_readable(g, &glyphs) {
        match glyphs.iter_mut().rev().find(|p| p.kind != FixtureKind::Plain) {
            Some(p) => to_plain(p),
            None => break,
        }
    }
    glyphs
}

/// Owner tags of painted pixels, used to check the ground-truth partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Owner {
    Glyph(usize),
    Matra(usize),
    Picture,
}

struct Canvas {
    img: GrayImage,
    owner: Vec<Option<Owner>>,
}

impl Canvas {
    fn new(w: usize, h: usize) -> Self {
        Canvas { img: GrayImage::new(w, h, BACKGROUND), owner: vec![None; w * h] }
    }

    fn paint(&mut self, r: &Rect, who: Owner) {
        let w = self.img.width();
        for y in r.y..r.bottom() {
            for x in r.x..r.right() {
                let slot = &mut self.owner[y * w + x];
                debug_assert!(slot.is_none_or(|o| o == who), "overlapping owners at ({x}, {y})");
                *slot = Some(who);
                self.img.set(x, y, INK);
            }
        }
    }
}

fn bounding_rects<'a>(rects: impl IntoIterator<Item = &'a Rect>) -> Option<Rect> {
    rects.into_iter().copied().reduce(|a, b| a.union(&b))
}

fn render_canvas(spec: &PageSpec) -> Result<(Canvas, GroundTruth)> {
    spec.validate()?;
    let g = Geometry::new(spec.scale);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(LAYOUT_STREAM);

    let plans: Vec<Vec<Vec<Vec<PlannedGlyph>>>> = (0..spec.columns)
        .map(|_| {
            (0..spec.lines)
                .map(|_| {
                    let n = spec.words_per_line.sample(&mut rng);
                    (0..n).map(|_| plan_word(&g, spec, &mut rng)).collect()
                })
                .collect()
        })
        .collect();
    let line_width = |words: &Vec<Vec<PlannedGlyph>>| {
        words.iter().map(|w| word_width(&g, w)).sum::<usize>() + g.word_gap * words.len().saturating_sub(1)
    };
    let content_h = if spec.lines == 0 { 0 } else { (spec.lines - 1) * g.pitch + g.s };
    let (page_w, page_h, col_w) = match spec.page_size {
        Some((w, h)) => {
            let inner = w.saturating_sub(2 * g.margin + (spec.columns - 1) * g.column_gap);
            let col_w = inner / spec.columns;
            if content_h + 2 * g.margin > h || (spec.lines > 0 && col_w < g.s * 2) {
                return Err(Error::GeometryOverflow(format!(
                    "{} lines of scale {} in {} columns do not fit a {w}x{h} page",
                    spec.lines, spec.scale, spec.columns
                )));
            }
            (w, h, col_w)
        }
        None => {
            let col_w = plans.iter().flatten().map(line_width).max().unwrap_or(0);
            let w = 2 * g.margin + spec.columns * col_w + (spec.columns - 1) * g.column_gap;
            (w, 2 * g.margin + content_h, col_w)
        }
    };
    if let Some(b) = spec.image_block {
        if !b.fits_in(page_w, page_h) {
            return Err(Error::GeometryOverflow(format!("image block {b:?} outside {page_w}x{page_h} page")));
        }
    }

    let mut canvas = Canvas::new(page_w, page_h);
    let mut lines = Vec::new();
    let mut blocks = Vec::new();
    let mut glyph_id = 0;
    let mut word_id = 0;
    for (c, column) in plans.iter().enumerate() {
        let col_x = g.margin + c * (col_w + g.column_gap);
        let first_line = lines.len();
        for (i, words) in column.iter().enumerate() {
            let top = g.margin + i * g.pitch;
            let band = Rect::new(col_x, top, col_w, g.s);
            if spec.image_block.is_some_and(|b| b.intersects(&band)) {
                continue;
            }
            let r = g.rows(top);
            let mut x = col_x;
            let mut truth_words = Vec::new();
            let mut has_lower = false;
            for word in words {
                let ww = word_width(&g, word);
                if x + ww > col_x + col_w {
                    break;
                }
                let matra = matra_rects(&g, &r, word, x);
                matra.iter().for_each(|m| canvas.paint(m, Owner::Matra(word_id)));
                let mut truth_glyphs = Vec::new();
                let mut gx = x;
                for p in word {
                    let shape = glyph_shape(&g, &r, p, gx);
                    shape.rects.iter().for_each(|rect| canvas.paint(rect, Owner::Glyph(glyph_id)));
                    let bbox = bounding_rects(&shape.rects).expect("glyphs are never empty");
                    has_lower |= bbox.last_row() > r.baseline;
                    truth_glyphs.push(TruthGlyph {
                        bbox,
                        zone_class: p.kind.zone_class(),
                        fixture: p.kind,
                        dot: shape.dot,
                    });
                    glyph_id += 1;
                    gx += p.width + g.letter_gap;
                }
                let bbox = bounding_rects(truth_glyphs.iter().map(|t| &t.bbox).chain(&matra)).expect("non-empty word");
                truth_words.push(TruthWord {
                    bbox,
                    matra: RowSpan::new(r.matra_top, r.middle_top - 1),
                    glyphs: truth_glyphs,
                });
                word_id += 1;
                x += ww + g.word_gap;
            }
            if truth_words.is_empty() {
                continue;
            }
            lines.push(TruthLine {
                bbox: bounding_rects(truth_words.iter().map(|w| &w.bbox)).expect("non-empty line"),
                column: c,
                matra: RowSpan::new(r.matra_top, r.middle_top - 1),
                baseline: r.baseline,
                zones: LineZones {
                    top: r.top,
                    matra_top: r.matra_top,
                    middle_top: r.middle_top,
                    baseline: r.baseline,
                    bottom: r.bottom,
                },
                has_lower,
                words: truth_words,
            });
        }
        if let Some(bbox) = bounding_rects(lines[first_line..].iter().map(|l| &l.bbox)) {
            blocks.push(TruthBlock { bbox, kind: BlockKind::Text });
        }
    }
    if let Some(b) = spec.image_block {
        canvas.paint(&b, Owner::Picture);
        blocks.push(TruthBlock { bbox: b, kind: BlockKind::NonText });
    }

    let truth = GroundTruth {
        generator: GENERATOR.to_string(),
        seed: spec.seed,
        scale: spec.scale,
        page_size: (page_w, page_h),
        skew_true: 0.0,
        noise_density: 0.0,
        zones: ZoneProportions {
            upper: g.upper as f64 / g.s as f64,
            middle: g.middle as f64 / g.s as f64,
            lower: g.lower as f64 / g.s as f64,
        },
        blocks,
        lines,
        noise_pixels: Vec::new(),
    };
    Ok((canvas, truth))
}

/// The page before noise and skew.
pub fn render_clean(spec: &PageSpec) -> Result<(GrayImage, GroundTruth)> {
    render_canvas(spec).map(|(c, t)| (c.img, t))
}

/// Renders the page, then applies the spec's noise and skew in that order.
pub fn render_page(spec: &PageSpec) -> Result<(GrayImage, GroundTruth)> {
    let (clean, mut truth) = render_clean(spec)?;
    let (noisy, flipped) = inject_noise(&clean, spec.noise, spec.seed);
    truth.noise_density = spec.noise;
    truth.noise_pixels = flipped;
    Ok(apply_skew(&noisy, &truth, spec.skew))
}

/// Salt-and-pepper noise: each pixel becomes ink with probability
/// `density/2` and background with probability `density/2`. Returns every
/// chosen coordinate, including pixels that already held the drawn value.
pub fn inject_noise(img: &GrayImage, density: f64, seed: u64) -> (GrayImage, Vec<(usize, usize)>) {
    let mut out = img.clone();
    let mut flipped = Vec::new();
    if density <= 0.0 {
        return (out, flipped);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(NOISE_STREAM);
    for y in 0..img.height() {
        for x in 0..img.width() {
            let u: f64 = rng.gen();
            if u < density / 2.0 {
                out.set(x, y, INK);
            } else if u < density {
                out.set(x, y, BACKGROUND);
            } else {
                continue;
            }
            flipped.push((x, y));
        }
    }
    (out, flipped)
}

/// Bounding rectangle of the rotated corners of `r`.
pub fn rotate_rect(frame: &RotationFrame, r: &Rect) -> Rect {
    let (x0, y0, x1, y1) = (r.x as f64, r.y as f64, r.last_col() as f64, r.last_row() as f64);
    let pts = [(x0, y0), (x1, y0), (x0, y1), (x1, y1)].map(|(x, y)| frame.forward(x, y));
    let (w, h) = frame.dst_size;
    let clamp = |v: f64, hi: usize| v.clamp(0.0, (hi - 1) as f64);
    let min_x = clamp(pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min).floor(), w) as usize;
    let max_x = clamp(pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max).ceil(), w) as usize;
    let min_y = clamp(pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min).floor(), h) as usize;
    let max_y = clamp(pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max).ceil(), h) as usize;
    Rect::from_corners(min_x, min_y, max_x, max_y)
}

/// Rotates the page by `theta` degrees and maps every truth rectangle.
pub fn apply_skew(img: &GrayImage, truth: &GroundTruth, theta: f64) -> (GrayImage, GroundTruth) {
    let mut t = truth.clone();
    t.skew_true = theta;
    if theta == 0.0 {
        return (img.clone(), t);
    }
    let frame = RotationFrame::new(img.width(), img.height(), theta);
    let map = |r: &mut Rect| *r = rotate_rect(&frame, r);
    t.blocks.iter_mut().for_each(|b| map(&mut b.bbox));
    for line in &mut t.lines {
        map(&mut line.bbox);
        for word in &mut line.words {
            map(&mut word.bbox);
            for glyph in &mut word.glyphs {
                map(&mut glyph.bbox);
                if let Some(d) = glyph.dot.as_mut() {
                    map(d);
                }
            }
        }
    }
    let (w, h) = frame.dst_size;
    for p in &mut t.noise_pixels {
        let (x, y) = frame.forward(p.0 as f64, p.1 as f64);
        *p = (x.round().clamp(0.0, (w - 1) as f64) as usize, y.round().clamp(0.0, (h - 1) as f64) as usize);
    }
    t.page_size = frame.dst_size;
    (rotate_gray(img, theta), t)
}
