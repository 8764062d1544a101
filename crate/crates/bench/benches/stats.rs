use breakscope_core::stats::{
    chi_squared, cliffs_delta, cochran_sample, fisher_exact, mann_whitney, Alternative, ContingencyTable,
};
use criterion::{black_box, criterion_group, criterion_main, Criterion};

fn sample(n: usize, seed: u64) -> Vec<f64> {
    // small LCG, enough for benchmark inputs
    let mut x = seed;
    (0..n)
        .map(|_| {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((x >> 33) % 50) as f64
        })
        .collect()
}

fn tests(c: &mut Criterion) {
    c.bench_function("cochran_sample", |b| b.iter(|| cochran_sample(black_box(293_817), 0.99, 0.01, 0.5)));
    c.bench_function("fisher_exact (replication counts)", |b| {
        b.iter(|| fisher_exact(black_box(1_250), 9_413, 1_130, 13_315))
    });
    let table = ContingencyTable::new()
        .row("major", &[1_250, 9_413])
        .row("minor", &[1_130, 13_315])
        .row("patch", &[735, 13_886])
        .row("dev", &[1_772, 8_761]);
    c.bench_function("chi_squared 4x2", |b| b.iter(|| chi_squared(black_box(&table))));

    let (small_x, small_y) = (sample(18, 1), sample(20, 2));
    c.bench_function("mann_whitney exact (18 vs 20, ties)", |b| {
        b.iter(|| mann_whitney(black_box(&small_x), &small_y, Alternative::TwoSided))
    });
    let (xs, ys) = (sample(2_000, 3), sample(1_500, 4));
    c.bench_function("mann_whitney normal (2000 vs 1500)", |b| {
        b.iter(|| mann_whitney(black_box(&xs), &ys, Alternative::TwoSided))
    });
    c.bench_function("cliffs_delta (2000 vs 1500)", |b| b.iter(|| cliffs_delta(black_box(&xs), &ys)));
}

criterion_group!(benches, tests);
criterion_main!(benches);
