mod args;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use matra_core::denoise::denoise_binary;
use matra_core::deskew::{deskew_page, estimate_skew};
use matra_core::layout::analyze;
use matra_core::pipeline::{dump_glyphs, emit_json, run_pipeline_with_images, write_atomic};
use matra_core::raster::{load_pgm, save_pgm, BinaryImage, GrayImage};
use matra_core::synthgen::{render_page, PageSpec};
use matra_core::{
    BinarizeMethod, BlockKind, Error, GlobalThresholdConfig, PageLayout, PageResult, PipelineConfig, Rect,
    SkewEstimate, StageFlags,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use args::{Cli, Command, RunArgs};

enum Failure {
    Usage(String),
    Processing(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast_ref::<Error>() {
            Some(Error::InvalidConfig(msg)) => Failure::Usage(msg.clone()),
            _ => Failure::Processing(e),
        }
    }
}

type Outcome<T = ()> = Result<T, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Processing(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn read_gray(path: &Path) -> anyhow::Result<GrayImage> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    load_pgm(&bytes).with_context(|| format!("decoding {}", path.display()))
}

fn read_binary(path: &Path) -> anyhow::Result<BinaryImage> {
    Ok(read_gray(path)?.threshold_below(128))
}

fn write_file(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    write_atomic(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => write_file(p, text.as_bytes()),
        None => std::io::stdout().write_all(text.as_bytes()).context("writing stdout"),
    }
}

fn round4(v: f64) -> f64 {
    (v * 1e4).round() / 1e4 + 0.0
}

#[derive(Serialize)]
struct SkewOut {
    theta: f64,
    score: f64,
}

impl SkewOut {
    fn new(est: &SkewEstimate) -> Self {
        SkewOut { theta: round4(est.theta_degrees), score: round4(est.score) }
    }
}

#[derive(Serialize)]
struct BlockOut {
    bbox: Rect,
    kind: BlockKind,
    ink_density: f64,
    mean_run: f64,
}

#[derive(Serialize)]
struct LayoutOut {
    source: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    skew: Option<SkewOut>,
    blocks: Vec<BlockOut>,
}

impl LayoutOut {
    fn new(source: String, skew: Option<SkewOut>, layout: &PageLayout) -> Self {
        let blocks = layout
            .blocks
            .iter()
            .map(|b| BlockOut {
                bbox: b.bbox,
                kind: b.kind,
                ink_density: round4(b.ink_density),
                mean_run: round4(b.mean_run),
            })
            .collect();
        LayoutOut { source, skew, blocks }
    }
}

fn pretty(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

fn validated(cfg: PipelineConfig) -> Outcome<PipelineConfig> {
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    Ok(cfg)
}

fn dispatch(command: Command) -> Outcome {
    match command {
        Command::Run(args) => run(&args),
        Command::Binarize { input, out, binarize } => {
            let method = binarize.method();
            validated(PipelineConfig { binarize: method, ..Default::default() })?;
            let gray = read_gray(&input)?;
            let bin = method.apply(&gray).map_err(anyhow::Error::from)?;
            Ok(write_file(&out, &save_pgm(&bin.to_gray()))?)
        }
        Command::Denoise { input, out, denoise } => {
            let cfg = denoise.config();
            cfg.validate().map_err(|e| usage(e.to_string()))?;
            let clean = denoise_binary(&read_binary(&input)?, &cfg).map_err(anyhow::Error::from)?;
            Ok(write_file(&out, &save_pgm(&clean.to_gray()))?)
        }
        Command::Deskew { input, out, binarize, skew } => {
            let cfg =
                validated(PipelineConfig { binarize: binarize.method(), skew: skew.config(), ..Default::default() })?;
            let gray = read_gray(&input)?;
            let bin = cfg.binarize.apply(&gray).map_err(anyhow::Error::from)?;
            let est = estimate_skew(&bin, cfg.skew.max_angle, cfg.skew.step).map_err(anyhow::Error::from)?;
            write_file(&out, &save_pgm(&deskew_page(&gray, &est)))?;
            Ok(emit(None, &pretty(&SkewOut::new(&est)))?)
        }
        Command::Layout { input, out, layout } => {
            let (page, _) = analyze(&read_binary(&input)?, &layout.config());
            let doc = LayoutOut::new(source_name(&input), None, &page);
            Ok(emit(out.as_deref(), &pretty(&doc))?)
        }
        Command::Segment { input, out, dump_glyphs: glyph_dir, segment } => {
            // binary input: fixed threshold, no cleanup, whole page as one block
            let cfg = validated(PipelineConfig {
                binarize: BinarizeMethod::Global(GlobalThresholdConfig { threshold: 128 }),
                segment: segment.config(),
                stages: StageFlags { denoise: false, deskew: false, layout: false, segment: true },
                ..Default::default()
            })?;
            let (result, images) = process(&input, &cfg)?;
            if let Some(dir) = glyph_dir {
                dump_glyphs(&result, &images.deskewed, &dir).map_err(anyhow::Error::from)?;
            }
            Ok(emit(out.as_deref(), &emit_json(&result))?)
        }
        Command::Synth { spec, out_dir } => synth(&spec, &out_dir),
    }
}

fn source_name(path: &Path) -> String {
    path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

fn process(input: &Path, cfg: &PipelineConfig) -> anyhow::Result<(PageResult, matra_core::pipeline::Intermediates)> {
    let gray = read_gray(input)?;
    let (mut result, images) =
        run_pipeline_with_images(&gray, cfg).with_context(|| format!("processing {}", input.display()))?;
    result.source = source_name(input);
    Ok((result, images))
}

/// One page of `run`: result JSON to `out` (or stdout), optional debug
/// artifacts and glyph crops.
fn run_one(input: &Path, out: Option<&Path>, args: &RunArgs, cfg: &PipelineConfig, batch: bool) -> anyhow::Result<()> {
    let per_page = |dir: &Path| {
        if batch {
            dir.join(input.file_stem().unwrap_or_default())
        } else {
            dir.to_path_buf()
        }
    };
    let mut cfg = cfg.clone();
    cfg.debug_dir = args.debug_dir.as_deref().map(per_page);
    let (result, images) = process(input, &cfg)?;
    log::info!("{}: {} blocks", result.source, result.layout.blocks.len());
    if let Some(dir) = &args.dump_glyphs {
        dump_glyphs(&result, &images.deskewed, &per_page(dir))?;
    }
    let text = if args.layout_only {
        pretty(&LayoutOut::new(result.source.clone(), Some(SkewOut::new(&result.skew)), &result.layout))
    } else {
        emit_json(&result)
    };
    emit(out, &text)
}

fn run(args: &RunArgs) -> Outcome {
    if args.jobs == 0 {
        return Err(usage("--jobs must be at least 1"));
    }
    let cfg = validated(args.config())?;
    if !args.input.is_dir() {
        return Ok(run_one(&args.input, args.out.as_deref(), args, &cfg, false)?);
    }

    let mut inputs: Vec<PathBuf> = fs::read_dir(&args.input)
        .with_context(|| format!("listing {}", args.input.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm")))
        .collect();
    inputs.sort();
    let out_dir = args.out.clone().unwrap_or_else(|| args.input.clone());
    fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;

    let pool = rayon::ThreadPoolBuilder::new().num_threads(args.jobs).build().context("starting workers")?;
    let failures: Vec<String> = pool.install(|| {
        inputs
            .par_iter()
            .filter_map(|input| {
                let out = out_dir.join(input.file_stem().unwrap_or_default()).with_extension("json");
                run_one(input, Some(&out), args, &cfg, true).err().map(|e| format!("{e:#}"))
            })
            .collect()
    });
    for f in &failures {
        eprintln!("error: {f}");
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Processing(anyhow::anyhow!("{} of {} pages failed", failures.len(), inputs.len())))
    }
}

fn synth(spec_path: &Path, out_dir: &Path) -> Outcome {
    let text = fs::read_to_string(spec_path).with_context(|| format!("reading {}", spec_path.display()))?;
    let mut doc: Value = serde_json::from_str(&text).map_err(|e| usage(format!("bad spec: {e}")))?;
    let count = match doc.as_object_mut().and_then(|o| o.remove("count")) {
        None => 1,
        Some(v) => v.as_u64().ok_or_else(|| usage("count must be a non-negative integer"))? as usize,
    };
    let spec: PageSpec = serde_json::from_value(doc).map_err(|e| usage(format!("bad spec: {e}")))?;
    spec.validate().map_err(|e| usage(e.to_string()))?;
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    for i in 0..count {
        let page = PageSpec { seed: spec.seed.wrapping_add(i as u64), ..spec.clone() };
        let (img, truth) = render_page(&page).map_err(anyhow::Error::from)?;
        let stem = out_dir.join(format!("page_{i:03}"));
        write_file(&stem.with_extension("pgm"), &save_pgm(&img))?;
        let mut json = serde_json::to_string_pretty(&truth).context("serializing truth")?;
        json.push('\n');
        write_file(&stem.with_extension("truth.json"), json.as_bytes())?;
    }
    Ok(())
}
