#![allow(dead_code)]

use matra_core::raster::{GrayImage, Rect};
use matra_core::synthgen::{CountRange, GlyphMix, PageSpec};
use matra_core::{TextLine, Word};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_gray(rng: &mut ChaCha8Rng, w: usize, h: usize) -> GrayImage {
    GrayImage::from_vec(w, h, (0..w * h).map(|_| rng.gen()).collect()).unwrap()
}

/// Every fixture kind at a modest rate.
pub fn full_mix() -> GlyphMix {
    GlyphMix {
        matraless: 0.06,
        dotted: 0.06,
        split_prone: 0.06,
        upper_modifier: 0.05,
        middle_modifier: 0.05,
        lower_modifier: 0.05,
        upper_middle_modifier: 0.05,
        descender: 0.06,
    }
}

/// Single-column pages with 5–40 lines, 2–8 words per line and 2–7
/// glyphs per word.
pub fn segmentation_corpus(n: usize) -> Vec<PageSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    (0..n)
        .map(|i| PageSpec {
            lines: if i == 0 {
                40
            } else if i == 1 {
                5
            } else {
                rng.gen_range(5..=40)
            },
            words_per_line: CountRange::new(2, 8),
            glyphs_per_word: CountRange::new(2, 7),
            mix: full_mix(),
            seed: 1000 + i as u64,
            ..Default::default()
        })
        .collect()
}

pub fn detected_lines(r: &matra_core::PageResult) -> Vec<&TextLine> {
    let mut lines: Vec<&TextLine> = r.lines.iter().flatten().collect();
    lines.sort_by_key(|l| (l.bbox.y, l.bbox.x));
    lines
}

pub fn best_iou(truth: &Rect, word: &Word) -> f64 {
    word.glyphs.iter().map(|g| g.bbox.iou(truth)).fold(0.0, f64::max)
}
