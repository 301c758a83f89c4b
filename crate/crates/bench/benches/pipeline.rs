use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use laguerre_bench::{noise_frame, scenario_frames, signal};
use laguerre_core::engine::{apply_1d, filter_frame_spatial};
use laguerre_core::pipeline::{LaguerreAnalyzer, Pipeline, StageTwoConfig};
use laguerre_core::synth::synthesis_filter;
use laguerre_core::{Omega, PipelineConfig, Sidedness};

fn filter_1d(c: &mut Criterion) {
    let x = signal(4096, 1);
    let mut group = c.benchmark_group("filter_1d");
    group.throughput(Throughput::Elements(x.len() as u64));
    for side in [Sidedness::Causal, Sidedness::TwoSided] {
        let f = synthesis_filter(0.7788, if side == Sidedness::Causal { 4.0 } else { 0.0 }, side).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(format!("{side:?}")), &f, |b, f| {
            b.iter(|| apply_1d(f, &x).unwrap())
        });
    }
    group.finish();
}

fn spatial_pass(c: &mut Criterion) {
    let f = synthesis_filter(0.6065, 0.0, Sidedness::TwoSided).unwrap();
    let mut group = c.benchmark_group("spatial_pass");
    for size in [128usize, 256] {
        let frame = noise_frame(size, size, 2);
        group.throughput(Throughput::Elements((size * size) as u64));
        group.bench_with_input(BenchmarkId::from_parameter(size), &frame, |b, frame| {
            b.iter(|| filter_frame_spatial(frame, &f, &f).unwrap())
        });
    }
    group.finish();
}

fn analyzer(c: &mut Criterion) {
    let frames = scenario_frames(128, 16);
    let mut group = c.benchmark_group("analyzer_frame");
    for (name, omega) in [("subset7", Omega::Subset7), ("full", Omega::Full)] {
        let cfg = StageTwoConfig {
            omega,
            ..StageTwoConfig::default()
        };
        let mut an = LaguerreAnalyzer::new(&cfg, 128, 128).unwrap();
        let mut i = 0;
        group.bench_function(name, |b| {
            b.iter(|| {
                i = (i + 1) % frames.len();
                an.push(&frames[i]).unwrap()
            })
        });
    }
    group.finish();
}

fn pipeline_frame(c: &mut Criterion) {
    let frames = scenario_frames(128, 64);
    let mut pipe = Pipeline::new(PipelineConfig::default(), 128, 128).unwrap();
    let mut i = 0;
    c.bench_function("pipeline_frame_128", |b| {
        b.iter(|| {
            i = (i + 1) % frames.len();
            pipe.push(&frames[i]).unwrap()
        })
    });
}

criterion_group!(benches, filter_1d, spatial_pass, analyzer, pipeline_frame);
criterion_main!(benches);
