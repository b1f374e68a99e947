use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use scgbp_core::{
    correct_peaks, detect_ao, detect_pac, generate, vmd_decompose, PipelineConfig, SynthConfig,
};

fn recording(secs: f64) -> scgbp_core::Recording {
    let cfg = SynthConfig {
        duration_s: secs,
        ..SynthConfig::default()
    };
    generate(&cfg).unwrap().0
}

fn vmd(c: &mut Criterion) {
    let cfg = PipelineConfig::default();
    let mut g = c.benchmark_group("vmd");
    g.sample_size(10);
    for secs in [10.0, 30.0] {
        let x = recording(secs).scg_z;
        g.bench_with_input(BenchmarkId::new("stage2", secs), &x, |b, x| {
            b.iter(|| vmd_decompose(black_box(x), &cfg.ao_detect.stage2).unwrap())
        });
    }
    g.finish();
}

fn fiducials(c: &mut Criterion) {
    let cfg = PipelineConfig::default();
    let x = recording(60.0).scg_z;
    let mut g = c.benchmark_group("fiducials_60s");
    g.sample_size(10);
    g.bench_function("detect_ao", |b| {
        b.iter(|| detect_ao(black_box(&x), &cfg.ao_detect).unwrap())
    });
    let aos = detect_ao(&x, &cfg.ao_detect).unwrap();
    g.bench_function("correct_peaks", |b| {
        b.iter(|| correct_peaks(black_box(&x), &aos, &cfg.peak_correct).unwrap())
    });
    g.bench_function("detect_pac", |b| {
        b.iter(|| detect_pac(black_box(&x), &aos, &cfg.pac_detect).unwrap())
    });
    g.finish();
}

criterion_group!(benches, vmd, fiducials);
criterion_main!(benches);
