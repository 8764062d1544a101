use breakscope_core::stats::special::chi2_sf;
use breakscope_core::stats::{
    chi_squared, cliffs_delta, distribution_summary, fisher_exact, holm_bonferroni, kruskal_wallis, mann_whitney,
    Alternative, ContingencyTable,
};
use proptest::prelude::*;

/// Pearson's statistic straight from observed and expected counts.
fn pearson(rows: &[Vec<u64>]) -> f64 {
    let total: f64 = rows.iter().flatten().sum::<u64>() as f64;
    let mut x2 = 0.0;
    for r in rows {
        let rs: f64 = r.iter().sum::<u64>() as f64;
        for (j, &o) in r.iter().enumerate() {
            let cs: f64 = rows.iter().map(|row| row[j]).sum::<u64>() as f64;
            let e = rs * cs / total;
            x2 += (o as f64 - e).powi(2) / e;
        }
    }
    x2
}

/// H with average ranks computed by counting, and the usual tie correction.
fn kruskal_h(groups: &[Vec<f64>]) -> f64 {
    let pooled: Vec<f64> = groups.iter().flatten().copied().collect();
    let n = pooled.len() as f64;
    let rank = |v: f64| {
        let below = pooled.iter().filter(|&&w| w < v).count() as f64;
        let equal = pooled.iter().filter(|&&w| w == v).count() as f64;
        below + (equal + 1.0) / 2.0
    };
    let mut h = 0.0;
    for g in groups {
        let r: f64 = g.iter().map(|&v| rank(v)).sum();
        h += r * r / g.len() as f64;
    }
    h = 12.0 / (n * (n + 1.0)) * h - 3.0 * (n + 1.0);
    let mut ties = 0.0;
    let mut seen: Vec<f64> = Vec::new();
    for &v in &pooled {
        if !seen.contains(&v) {
            seen.push(v);
            let t = pooled.iter().filter(|&&w| w == v).count() as f64;
            ties += t * t * t - t;
        }
    }
    h / (1.0 - ties / (n * n * n - n))
}

#[test]
fn chi_squared_matches_pearson_and_closed_form_tail() {
    let rows = vec![vec![12, 30, 9], vec![20, 15, 25]];
    let mut t = ContingencyTable::new();
    for (i, r) in rows.iter().enumerate() {
        t = t.row(&i.to_string(), r);
    }
    let r = chi_squared(&t).unwrap();
    let x2 = pearson(&rows);
    assert!((r.statistic - x2).abs() < 1e-9);
    assert_eq!(r.df, Some(2.0));
    // with two degrees of freedom the tail is exp(-x/2)
    assert!((r.p_value - (-x2 / 2.0).exp()).abs() < 1e-12);
}

#[test]
fn chi2_tail_for_even_degrees_of_freedom() {
    // P(X > x) for 2k degrees of freedom is exp(-x/2) * sum_{i<k} (x/2)^i / i!
    for k in 1..6u32 {
        for x in [0.5, 3.0, 11.0, 40.0] {
            let half: f64 = x / 2.0;
            let mut term = 1.0;
            let mut sum = 0.0;
            for i in 0..k {
                if i > 0 {
                    term *= half / i as f64;
                }
                sum += term;
            }
            let want = (-half).exp() * sum;
            let got = chi2_sf(x, 2.0 * k as f64);
            assert!((got - want).abs() <= 1e-12 + 1e-10 * want, "df {} x {x}: {got} vs {want}", 2 * k);
        }
    }
}

#[test]
fn kruskal_wallis_matches_direct_formula() {
    let groups = vec![vec![2.9, 3.0, 2.5, 2.6, 3.2], vec![3.8, 2.7, 4.0, 2.4], vec![2.8, 3.4, 3.7, 2.2, 2.0]];
    let r = kruskal_wallis(&groups).unwrap();
    let h = kruskal_h(&groups);
    assert!((r.statistic - h).abs() < 1e-9);
    assert!((r.p_value - (-h / 2.0).exp()).abs() < 1e-12);

    let tied = vec![vec![1.0, 1.0, 2.0], vec![2.0, 3.0, 3.0, 3.0], vec![1.0, 4.0]];
    let r = kruskal_wallis(&tied).unwrap();
    assert!((r.statistic - kruskal_h(&tied)).abs() < 1e-9);
}

#[test]
fn large_samples_use_the_normal_approximation() {
    let xs: Vec<f64> = (0..30).map(|i| (i % 7) as f64).collect();
    let ys: Vec<f64> = (0..25).map(|i| (i % 5) as f64 + 1.0).collect();
    let r = mann_whitney(&xs, &ys, Alternative::TwoSided).unwrap();
    // mean and tie-corrected variance of U under the null, continuity corrected
    let pooled: Vec<f64> = xs.iter().chain(&ys).copied().collect();
    let (n1, n2, n) = (30.0, 25.0, 55.0);
    let mut ties = 0.0;
    for v in 0..8 {
        let t = pooled.iter().filter(|&&w| w == v as f64).count() as f64;
        ties += t * t * t - t;
    }
    let sigma = (n1 * n2 / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)))).sqrt();
    let z = ((r.statistic - n1 * n2 / 2.0).abs() - 0.5) / sigma;
    let want = breakscope_core::stats::special::erfc(z / std::f64::consts::SQRT_2);
    assert!((r.p_value - want).abs() < 1e-12);
}

#[test]
fn distribution_summary_uses_linear_interpolation() {
    let s = distribution_summary(&[7.0, 1.0, 3.0, 10.0]).unwrap();
    assert_eq!((s.min, s.max), (1.0, 10.0));
    assert!((s.q1 - 2.5).abs() < 1e-12);
    assert!((s.median - 5.0).abs() < 1e-12);
    assert!((s.q3 - 7.75).abs() < 1e-12);
    assert!((s.mean - 5.25).abs() < 1e-12);
}

fn sample(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((0u32..12).prop_map(f64::from), 1..max_len)
}

proptest! {
    #[test]
    fn fisher_p_is_a_probability_and_symmetric(a in 0u64..30, b in 0u64..30, c in 0u64..30, d in 0u64..30) {
        prop_assume!(a + b + c + d > 0);
        let p = fisher_exact(a, b, c, d).unwrap().p_value;
        prop_assert!((0.0..=1.0).contains(&p));
        let swapped = fisher_exact(c, d, a, b).unwrap().p_value;
        let transposed = fisher_exact(a, c, b, d).unwrap().p_value;
        prop_assert!((p - swapped).abs() < 1e-12);
        prop_assert!((p - transposed).abs() < 1e-12);
    }

    #[test]
    fn mann_whitney_two_sided_is_symmetric(xs in sample(25), ys in sample(25)) {
        let a = mann_whitney(&xs, &ys, Alternative::TwoSided).unwrap();
        let b = mann_whitney(&ys, &xs, Alternative::TwoSided).unwrap();
        prop_assert!((a.p_value - b.p_value).abs() < 1e-12);
        prop_assert!((a.statistic + b.statistic - (xs.len() * ys.len()) as f64).abs() < 1e-9);
        let less = mann_whitney(&xs, &ys, Alternative::Less).unwrap().p_value;
        let greater = mann_whitney(&ys, &xs, Alternative::Greater).unwrap().p_value;
        prop_assert!((less - greater).abs() < 1e-12);
    }

    #[test]
    fn cliffs_delta_is_antisymmetric_and_bounded(xs in sample(40), ys in sample(40)) {
        let (d, _) = cliffs_delta(&xs, &ys).unwrap();
        let (e, _) = cliffs_delta(&ys, &xs).unwrap();
        prop_assert!((-1.0..=1.0).contains(&d));
        prop_assert!((d + e).abs() < 1e-12);
    }

    #[test]
    fn kruskal_wallis_ignores_group_order(a in sample(10), b in sample(10), c in sample(10)) {
        let pooled: Vec<f64> = a.iter().chain(&b).chain(&c).copied().collect();
        prop_assume!(pooled.iter().any(|&v| v != pooled[0]));
        let r1 = kruskal_wallis(&[a.clone(), b.clone(), c.clone()]).unwrap();
        let r2 = kruskal_wallis(&[c, a, b]).unwrap();
        prop_assert!((r1.statistic - r2.statistic).abs() < 1e-9);
        prop_assert!((0.0..=1.0).contains(&r1.p_value));
    }

    #[test]
    fn holm_never_lowers_a_p_value(ps in prop::collection::vec(0.0f64..1.0, 1..12)) {
        let adj = holm_bonferroni(&ps);
        for (p, q) in ps.iter().zip(&adj) {
            prop_assert!(q >= p && *q <= 1.0);
        }
    }
}
