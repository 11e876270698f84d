//! Preprocessing and segmentation front end for OCR of matra (headline)
//! scripts such as Bangla.
//!
//! The crate covers the path from a scanned grayscale page to glyph boxes:
//! binarization, denoising, skew estimation and correction, run-length
//! smoothing layout analysis, and line/word/character segmentation driven by
//! the headline (matra) and baseline. A synthetic page generator with exact
//! ground truth backs the test suite.

pub mod binarize;
pub mod denoise;
pub mod deskew;
mod error;
pub mod layout;
pub mod pipeline;
pub mod raster;
pub mod segment;
pub mod synthgen;

pub use binarize::{BinarizeMethod, GlobalThresholdConfig, LocalThresholdConfig};
pub use denoise::DenoiseConfig;
pub use deskew::{Envelope, SkewConfig, SkewEstimate};
pub use error::{Error, Result};
pub use layout::{Block, BlockKind, LayoutConfig, PageLayout};

pub use pipeline::{PageResult, PipelineConfig, StageFlags};
pub use raster::{BinaryImage, Component, GrayImage, Rect, RowSpan, WindowStats};
pub use segment::{Glyph, SegmentConfig, TextLine, Word, ZoneClass};
pub use synthgen::{GroundTruth, PageSpec};
