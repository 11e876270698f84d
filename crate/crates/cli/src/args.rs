use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use matra_core::{
    BinarizeMethod, DenoiseConfig, GlobalThresholdConfig, LayoutConfig, LocalThresholdConfig, PipelineConfig,
    SegmentConfig, SkewConfig, StageFlags,
};

#[derive(Debug, Parser)]
#[command(name = "matra-pipeline", version, about = "Preprocessing and segmentation for matra-script page images")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Full pipeline on a PGM file or a directory of PGM files.
    Run(RunArgs),
    /// Grayscale to binary; writes a 0/255 PGM.
    Binarize {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        binarize: BinarizeArgs,
    },
    /// Cleans a binary PGM (pixels below 128 are ink).
    Denoise {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        denoise: DenoiseArgs,
    },
    /// Estimates skew, prints it as JSON and writes the corrected grayscale page.
    Deskew {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        binarize: BinarizeArgs,
        #[command(flatten)]
        skew: SkewArgs,
    },
    /// Block analysis of a binary PGM; prints block JSON.
    Layout {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        layout: LayoutArgs,
    },
    /// Line, word and glyph segmentation of a binary PGM treated as one block.
    Segment {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        dump_glyphs: Option<PathBuf>,
        #[command(flatten)]
        segment: SegmentArgs,
    },
    /// Renders synthetic pages with ground truth.
    Synth {
        /// JSON page spec; an optional "count" field renders that many pages
        /// with consecutive seeds.
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// A PGM file, or a directory whose *.pgm files are processed.
    pub input: PathBuf,
    /// Result file (single input) or directory (batch). Defaults to stdout
    /// for a single file and to the input directory for a batch.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub debug_dir: Option<PathBuf>,
    #[arg(long)]
    pub dump_glyphs: Option<PathBuf>,
    /// Worker threads for batch directories.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Emit block JSON and stop after layout.
    #[arg(long)]
    pub layout_only: bool,
    #[command(flatten)]
    pub binarize: BinarizeArgs,
    #[command(flatten)]
    pub denoise: DenoiseArgs,
    #[command(flatten)]
    pub skew: SkewArgs,
    #[command(flatten)]
    pub layout: LayoutArgs,
    #[command(flatten)]
    pub segment: SegmentArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Method {
    Global,
    Otsu,
    Niblack,
    AdaptiveNiblack,
    Sauvola,
}

#[derive(Debug, Args)]
pub struct BinarizeArgs {
    #[arg(long, value_enum, default_value = "otsu")]
    pub method: Method,
    #[arg(long, default_value_t = 128)]
    pub threshold: u8,
    /// Odd window side for niblack and sauvola.
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<f64>,
    #[arg(long = "R")]
    pub r: Option<f64>,
}

impl BinarizeArgs {
    pub fn method(&self) -> BinarizeMethod {
        let local = |d: LocalThresholdConfig| LocalThresholdConfig {
            window: self.window.unwrap_or(d.window),
            k: self.k.unwrap_or(d.k),
            r: self.r.unwrap_or(d.r),
        };
        match self.method {
            Method::Global => BinarizeMethod::Global(GlobalThresholdConfig { threshold: self.threshold }),
            Method::Otsu => BinarizeMethod::Otsu,
            Method::Niblack => BinarizeMethod::Niblack(local(LocalThresholdConfig::niblack_default())),
            Method::AdaptiveNiblack => BinarizeMethod::AdaptiveNiblack,
            Method::Sauvola => BinarizeMethod::Sauvola(local(LocalThresholdConfig::sauvola_default())),
        }
    }
}

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    /// Odd median window; 0 skips the median pass.
    #[arg(long, default_value_t = 3)]
    pub median: usize,
    #[arg(long, default_value_t = 0.05)]
    pub speck_alpha: f64,
    #[arg(long, action = ArgAction::Set, default_value_t = true)]
    pub dot_protect: bool,
}

impl DenoiseArgs {
    pub fn config(&self) -> DenoiseConfig {
        DenoiseConfig {
            median_window: (self.median != 0).then_some(self.median),
            area_factor_alpha: self.speck_alpha,
            dot_protect: self.dot_protect,
        }
    }
}

#[derive(Debug, Args)]
pub struct SkewArgs {
    #[arg(long, default_value_t = 15.0)]
    pub max_skew: f64,
    #[arg(long, default_value_t = 0.1)]
    pub skew_step: f64,
    #[arg(long)]
    pub no_deskew: bool,
}

impl SkewArgs {
    pub fn config(&self) -> SkewConfig {
        SkewConfig { max_angle: self.max_skew, step: self.skew_step }
    }
}

#[derive(Debug, Args)]
pub struct LayoutArgs {
    #[arg(long)]
    pub rlsa_h: Option<usize>,
    #[arg(long)]
    pub rlsa_v: Option<usize>,
}

impl LayoutArgs {
    pub fn config(&self) -> LayoutConfig {
        LayoutConfig { rlsa_h: self.rlsa_h, rlsa_v: self.rlsa_v }
    }
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub baseline_tol: Option<usize>,
}

impl SegmentArgs {
    pub fn config(&self) -> SegmentConfig {
        let d = SegmentConfig::default();
        SegmentConfig {
            word_gap_factor: self.beta.unwrap_or(d.word_gap_factor),
            matra_extend: self.gamma.unwrap_or(d.matra_extend),
            baseline_tolerance: self.baseline_tol.unwrap_or(d.baseline_tolerance),
            ..d
        }
    }
}

impl RunArgs {
    pub fn config(&self) -> PipelineConfig {
        PipelineConfig {
            binarize: self.binarize.method(),
            denoise: self.denoise.config(),
            skew: self.skew.config(),
            layout: self.layout.config(),
            segment: self.segment.config(),
            debug_dir: None,
            stages: StageFlags { deskew: !self.skew.no_deskew, segment: !self.layout_only, ..Default::default() },
        }
    }
}
