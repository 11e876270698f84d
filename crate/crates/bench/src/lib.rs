//! Shared inputs for the stage benchmarks.

use matra_core::denoise::denoise_binary;
use matra_core::synthgen::{render_page, GlyphMix, PageSpec};
use matra_core::{BinarizeMethod, BinaryImage, DenoiseConfig, GrayImage};

/// A noisy, slightly skewed page at roughly 300 dpi proportions.
pub fn sample_page() -> GrayImage {
    let spec = PageSpec {
        page_size: Some((1000, 1400)),
        lines: 20,
        mix: GlyphMix { dotted: 0.05, descender: 0.05, lower_modifier: 0.05, ..Default::default() },
        noise: 0.001,
        skew: 2.0,
        seed: 42,
        ..Default::default()
    };
    render_page(&spec).expect("bench spec fits").0
}

/// The sample page binarized and cleaned.
pub fn clean_binary(gray: &GrayImage) -> BinaryImage {
    let bin = BinarizeMethod::Otsu.apply(gray).expect("page has ink");
    denoise_binary(&bin, &DenoiseConfig::default()).expect("default config is valid")
}
