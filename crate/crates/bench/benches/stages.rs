use criterion::{black_box, criterion_group, criterion_main, Criterion};
use matra_bench::{clean_binary, sample_page};
use matra_core::denoise::denoise_binary;
use matra_core::deskew::{deskew_page, estimate_skew};
use matra_core::layout::analyze;
use matra_core::pipeline::run_pipeline;
use matra_core::segment::segment_block;
use matra_core::{BinarizeMethod, DenoiseConfig, LayoutConfig, LocalThresholdConfig, PipelineConfig, SegmentConfig};

fn stages(c: &mut Criterion) {
    let gray = sample_page();
    let binary = BinarizeMethod::Otsu.apply(&gray).unwrap();
    let clean = clean_binary(&gray);
    let est = estimate_skew(&clean, 15.0, 0.1).unwrap();
    let straight = clean_binary(&deskew_page(&gray, &est));
    let (layout, _) = analyze(&straight, &LayoutConfig::default());

    let mut g = c.benchmark_group("binarize");
    g.bench_function("otsu", |b| b.iter(|| BinarizeMethod::Otsu.apply(black_box(&gray))));
    let sauvola = BinarizeMethod::Sauvola(LocalThresholdConfig::sauvola_default());
    g.bench_function("sauvola", |b| b.iter(|| sauvola.apply(black_box(&gray))));
    g.bench_function("adaptive_niblack", |b| b.iter(|| BinarizeMethod::AdaptiveNiblack.apply(black_box(&gray))));
    g.finish();

    c.bench_function("denoise", |b| b.iter(|| denoise_binary(black_box(&binary), &DenoiseConfig::default())));
    c.bench_function("skew_estimate", |b| b.iter(|| estimate_skew(black_box(&clean), 15.0, 0.1)));
    c.bench_function("deskew_rotate", |b| b.iter(|| deskew_page(black_box(&gray), &est)));
    c.bench_function("layout", |b| b.iter(|| analyze(black_box(&straight), &LayoutConfig::default())));
    c.bench_function("segment", |b| {
        b.iter(|| {
            for block in &layout.blocks {
                segment_block(black_box(&straight), block.bbox, &SegmentConfig::default()).unwrap();
            }
        })
    });

    let mut g = c.benchmark_group("end_to_end");
    g.sample_size(10);
    g.bench_function("pipeline", |b| b.iter(|| run_pipeline(black_box(&gray), &PipelineConfig::default())));
    g.finish();
}

criterion_group!(benches, stages);
criterion_main!(benches);
