use breakscope_core::fixtures::{self, catalog_cases};
use breakscope_core::{build_model, compute_delta, compute_detections, extract_usage, read_jar, StabilityConfig};
use criterion::{black_box, criterion_group, criterion_main, Criterion};

fn parse_and_model(c: &mut Criterion) {
    let bytes = fixtures::servlet_3_1_0().bytes();
    let config = StabilityConfig::default();
    c.bench_function("read_jar + build_model (servlet)", |b| {
        b.iter(|| {
            let jar = read_jar(black_box(&bytes), "servlet").unwrap();
            build_model(&jar, &config)
        })
    });
}

fn delta_over_catalog(c: &mut Criterion) {
    let config = StabilityConfig::default();
    let models: Vec<_> = catalog_cases()
        .iter()
        .map(|case| (build_model(&case.old.content("old"), &config), build_model(&case.new.content("new"), &config)))
        .collect();
    c.bench_function("compute_delta (31 catalog pairs)", |b| {
        b.iter(|| models.iter().map(|(old, new)| compute_delta(old, new).changes.len()).sum::<usize>())
    });
}

fn detections(c: &mut Criterion) {
    let config = StabilityConfig::default();
    let old = build_model(&fixtures::servlet_3_0_1().content("3.0.1"), &config);
    let new = build_model(&fixtures::servlet_3_1_0().content("3.1.0"), &config);
    let delta = compute_delta(&old, &new);
    let client = fixtures::mock_request_client().content("client");
    c.bench_function("extract_usage + compute_detections (servlet)", |b| {
        b.iter(|| {
            let usage = extract_usage(black_box(&client), &old);
            compute_detections(&delta, &usage).unwrap().len()
        })
    });
}

fn accuracy_suite(c: &mut Criterion) {
    let dir = tempfile::tempdir().unwrap();
    fixtures::write_bench_suite(dir.path()).unwrap();
    let cases = breakscope_core::benchmark::load_manifest(&dir.path().join("manifest.json")).unwrap();
    let config = StabilityConfig::default();
    let mut group = c.benchmark_group("accuracy");
    group.sample_size(20);
    group.bench_function("run_benchmark (bundled suite)", |b| {
        b.iter(|| breakscope_core::benchmark::run_benchmark(&cases, &config).tp)
    });
    group.finish();
}

criterion_group!(benches, parse_and_model, delta_over_catalog, detections, accuracy_suite);
criterion_main!(benches);
