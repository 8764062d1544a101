//! Acceptance criteria. Runs without the libtest harness so every criterion
//! prints a single PASS/FAIL line; exits non-zero if any fails.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::time::{Duration, Instant};

use breakscope_core::analysis::{broken_client_tests, LevelCounts};
use breakscope_core::apimodel::{build_model, ElementRef, StabilityConfig};
use breakscope_core::benchmark::{load_manifest, run_benchmark, score, Verdict};
use breakscope_core::corpus::{derive_upgrades, load_graph, run_pipeline, ExclusionReason, JarStore, PipelineOptions};
use breakscope_core::delta::{compute_delta, BcKind};
use breakscope_core::detect::compute_detections;
use breakscope_core::fixtures;
use breakscope_core::semver::SemverLevel;
use breakscope_core::stats::{
    chi_squared, cliffs_delta, cochran_sample, fisher_exact, interpret_cliffs_delta, mann_whitney, odds_ratio,
    percentage, Alternative, ContingencyTable, Magnitude,
};
use breakscope_core::usage::{extract_usage, UseKind};

type Outcome = Result<String, String>;

fn check(ok: bool, msg: impl Into<String>) -> Outcome {
    if ok {
        Ok(msg.into())
    } else {
        Err(msg.into())
    }
}

/// (population, sample, broken) for Major, Minor, Patch, Dev and All.
struct Dataset {
    levels: [(u64, u64, u64); 4],
    all: (u64, u64, u64),
    pct: [f64; 5],
}

const ORIGINAL: Dataset = Dataset {
    levels: [(2_861, 2_440, 309), (13_444, 7_426, 883), (17_425, 8_498, 514), (1_809, 1_631, 300)],
    all: (35_539, 11_310, 1_076),
    pct: [9.5, 12.7, 11.9, 6.0, 18.4],
};

const REPLICATION: Dataset = Dataset {
    levels: [(29_847, 10_663, 1_250), (111_830, 14_445, 1_130), (123_286, 14_621, 735), (28_854, 10_533, 1_772)],
    all: (293_817, 15_701, 1_237),
    pct: [7.9, 11.7, 7.8, 5.0, 16.8],
};

fn level_counts(d: &Dataset) -> Vec<LevelCounts> {
    SemverLevel::ALL
        .into_iter()
        .zip(d.levels)
        .map(|(level, (population, sample, broken))| LevelCounts { level, population, sample, broken })
        .collect()
}

fn cochran() -> Outcome {
    let mut pairs = Vec::new();
    for d in [&REPLICATION, &ORIGINAL] {
        pairs.push((d.all.0, d.all.1));
        pairs.extend(d.levels.iter().map(|l| (l.0, l.1)));
    }
    let _ = cochran_sample(1000, 0.99, 0.01, 0.5);
    let start = Instant::now();
    let got: Vec<u64> = pairs.iter().map(|&(n, _)| cochran_sample(n, 0.99, 0.01, 0.5).unwrap_or(0)).collect();
    let elapsed = start.elapsed();
    let worst = pairs.iter().zip(&got).map(|(&(_, want), &g)| g.abs_diff(want)).max().unwrap_or(0);
    check(
        worst <= 2 && elapsed < Duration::from_millis(1),
        format!("10 sample sizes, max deviation {worst} (limit 2), {elapsed:?} (limit 1 ms)"),
    )
}

fn odds_ratios() -> Outcome {
    let want = [0.64, 0.40, 1.52, 0.62, 2.38, 3.82];
    let l = REPLICATION.levels;
    let mut got = Vec::new();
    for i in 0..4 {
        for j in i + 1..4 {
            let or = odds_ratio(l[i].2, l[i].1, l[j].2, l[j].1).map_err(|e| e.to_string())?;
            got.push(or.value().unwrap_or(f64::NAN));
        }
    }
    let worst = got.iter().zip(want).map(|(g, w)| (g - w).abs()).fold(0.0, f64::max);
    let shown: Vec<String> = got.iter().map(|g| format!("{g:.3}")).collect();
    check(worst <= 0.01, format!("odds ratios [{}], max deviation {worst:.4} (limit 0.01)", shown.join(", ")))
}

fn proportions() -> Outcome {
    let mut worst: f64 = 0.0;
    for d in [&ORIGINAL, &REPLICATION] {
        let rows = std::iter::once(d.all).chain(d.levels);
        for ((_, sample, broken), want) in rows.zip(d.pct) {
            let got = percentage(broken, sample).ok_or("empty sample")?;
            worst = worst.max((got - want).abs());
        }
    }
    check(worst <= 0.1, format!("10 broken-client percentages, max deviation {worst:.3} pp (limit 0.1)"))
}

fn significance() -> Outcome {
    let mut table = ContingencyTable::new();
    for (level, (_, sample, broken)) in SemverLevel::ALL.into_iter().zip(REPLICATION.levels) {
        table = table.row(level.as_str(), &[broken, sample - broken]);
    }
    let chi = chi_squared(&table).map_err(|e| e.to_string())?;
    let tests = broken_client_tests(&level_counts(&REPLICATION));
    let worst = tests.pairs.iter().filter_map(|p| p.result.adjusted_p).fold(0.0, f64::max);
    check(
        chi.p_value < 1e-15 && tests.pairs.len() == 6 && worst < 0.01,
        format!(
            "chi-squared {:.1} on {} df, p = {:.2e} (limit 1e-15); largest Holm-adjusted Fisher p = {worst:.2e} over {} pairs (limit 0.01)",
            chi.statistic,
            chi.df.unwrap_or(0.0),
            chi.p_value,
            tests.pairs.len()
        ),
    )
}

fn effect_labels() -> Outcome {
    let cases = [
        (0.16, Magnitude::Small),
        (0.20, Magnitude::Small),
        (0.12, Magnitude::Negligible),
        (0.04, Magnitude::Negligible),
        (0.08, Magnitude::Negligible),
        (-0.04, Magnitude::Negligible),
    ];
    let wrong: Vec<String> = cases
        .iter()
        .filter(|(d, m)| interpret_cliffs_delta(*d) != *m)
        .map(|(d, m)| format!("{d} -> {} (want {m})", interpret_cliffs_delta(*d)))
        .collect();
    check(
        wrong.is_empty(),
        if wrong.is_empty() { "6 deltas labelled as in the reference table".into() } else { wrong.join("; ") },
    )
}

fn bench_arithmetic() -> Outcome {
    let (p, r) = score(130, 5, 2);
    let (p, r) = (p * 100.0, r * 100.0);
    check(
        (p - 96.3).abs() <= 0.1 && (r - 98.5).abs() <= 0.1,
        format!("precision {p:.2}% (want 96.3), recall {r:.2}% (want 98.5)"),
    )
}

fn delta_oracles() -> Outcome {
    let start = Instant::now();
    let config = StabilityConfig::default();
    let mut missing = 0;
    let mut spurious = 0;
    let mut failing = Vec::new();
    let cases = fixtures::catalog_cases();
    let covered: BTreeSet<BcKind> = cases.iter().map(|c| c.kind).collect();
    for case in &cases {
        let old = build_model(&case.old.content("v1"), &config);
        let new = build_model(&case.new.content("v2"), &config);
        let got: BTreeSet<(BcKind, ElementRef)> =
            compute_delta(&old, &new).changes.into_iter().map(|c| (c.kind, c.element)).collect();
        let want: BTreeSet<(BcKind, ElementRef)> = case.expected.iter().cloned().collect();
        let m = want.difference(&got).count();
        let s = got.difference(&want).count();
        if m + s > 0 {
            failing.push(case.kind.name());
        }
        missing += m;
        spurious += s;
    }
    let elapsed = start.elapsed();
    check(
        covered.len() == BcKind::ALL.len() && failing.is_empty() && elapsed < Duration::from_secs(10),
        format!(
            "{} of {} kinds covered, {missing} missing, {spurious} spurious{}, {elapsed:.2?} (limit 10 s)",
            covered.len(),
            BcKind::ALL.len(),
            if failing.is_empty() { String::new() } else { format!(" in {}", failing.join(", ")) }
        ),
    )
}

fn detection_oracles() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let manifest = fixtures::write_bench_suite(dir.path()).map_err(|e| e.to_string())?;
    let cases = load_manifest(&manifest).map_err(|e| e.to_string())?;
    let kinds: BTreeSet<BcKind> = cases.iter().filter_map(|c| c.expected_kind).collect();
    let report = run_benchmark(&cases, &StabilityConfig::default());
    let gap_misses = report.outcomes.iter().filter(|o| o.gap.is_some() && o.verdict == Verdict::FalseNegative).count();

    let config = StabilityConfig::default();
    let old = build_model(&fixtures::servlet_3_0_1().content("servlet-3.0.1"), &config);
    let new = build_model(&fixtures::servlet_3_1_0().content("servlet-3.1.0"), &config);
    let delta = compute_delta(&old, &new);
    let usage = extract_usage(&fixtures::mock_request_client().content("spring-test"), &old);
    let found = compute_detections(&delta, &usage).map_err(|e| e.to_string())?;
    let servlet_ok = found.len() == 1
        && found[0].bc_kind == BcKind::MethodAddedToInterface
        && found[0].use_kind == UseKind::Implements;

    check(
        report.invalid == 0
            && kinds.len() == BcKind::ALL.len()
            && report.recall_excluding_gaps == 1.0
            && report.unattributed_fp == 0
            && gap_misses == 2
            && servlet_ok,
        format!(
            "{} cases over {} kinds: tp {} fp {} fn {}, recall {:.1}% ({:.1}% without {gap_misses} gap misses), {} unattributed FPs, FPs by rule {:?}; servlet example: {} detection(s){}",
            report.cases,
            kinds.len(),
            report.tp,
            report.fp,
            report.fn_,
            report.recall * 100.0,
            report.recall_excluding_gaps * 100.0,
            report.unattributed_fp,
            report.fp_by_rule,
            found.len(),
            found.first().map(|d| format!(" ({} x {:?})", d.bc_kind.name(), d.use_kind)).unwrap_or_default()
        ),
    )
}

fn semver_pipeline() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let servlet = fixtures::write_servlet_corpus(&dir.path().join("servlet")).map_err(|e| e.to_string())?;
    let graph = load_graph(&servlet.graph_dir).map_err(|e| e.to_string())?;
    let d = derive_upgrades(&graph, &JarStore::new(&servlet.jar_dir));
    let got: Vec<(String, String, SemverLevel)> =
        d.upgrades.iter().map(|u| (u.v1.raw.clone(), u.v2.raw.clone(), u.level)).collect();
    let want = vec![
        ("3.0.1".to_string(), "3.1.0".to_string(), SemverLevel::Minor),
        ("3.1.0".to_string(), "4.0.0".to_string(), SemverLevel::Major),
        ("4.0.0".to_string(), "4.0.1".to_string(), SemverLevel::Patch),
    ];
    let qualified =
        d.exclusions.iter().any(|e| e.v1 == "4.0.0-b01" && e.reason == ExclusionReason::NonCompliantVersion);

    let wide = fixtures::write_filter_corpus(&dir.path().join("filters")).map_err(|e| e.to_string())?;
    let graph = load_graph(&wide.graph_dir).map_err(|e| e.to_string())?;
    let w = derive_upgrades(&graph, &JarStore::new(&wide.jar_dir));
    let date_like = w.exclusions.iter().any(|e| e.v1 == "2.5.20110712" && e.reason == ExclusionReason::DateLikeVersion);
    let reasons: BTreeSet<&str> = w.exclusions.iter().map(|e| e.reason.as_str()).collect();

    let shown: Vec<String> = got.iter().map(|(a, b, l)| format!("{a}->{b} {}", l.as_str())).collect();
    check(
        got == want && qualified && date_like,
        format!(
            "upgrades [{}]; 4.0.0-b01 excluded as non-compliant: {qualified}; 2.5.20110712 excluded as date-like: {date_like}; reasons seen {:?}",
            shown.join(", "),
            reasons
        ),
    )
}

fn binom(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r
}

/// Two-sided Fisher p by enumerating every table with the same margins,
/// comparing unnormalised probabilities as exact integers.
fn fisher_brute(a: u64, b: u64, c: u64, d: u64) -> f64 {
    let (r1, r2, c1) = (a + b, c + d, a + c);
    let weight = |x: u64| binom(r1, x) * binom(r2, c1 - x);
    let observed = weight(a);
    let lo = c1.saturating_sub(r2);
    let hi = c1.min(r1);
    let total: u128 = (lo..=hi).map(weight).sum();
    let tail: u128 = (lo..=hi).map(weight).filter(|&w| w <= observed).sum();
    tail as f64 / total as f64
}

/// U for `xs` by pair counting, doubled to stay integral.
fn u_doubled(xs: &[f64], ys: &[f64]) -> u64 {
    xs.iter()
        .flat_map(|x| {
            ys.iter().map(move |y| {
                if x > y {
                    2
                } else if x == y {
                    1
                } else {
                    0
                }
            })
        })
        .sum()
}

fn mw_brute(xs: &[f64], ys: &[f64]) -> [f64; 3] {
    let pooled: Vec<f64> = xs.iter().chain(ys).copied().collect();
    let n = pooled.len();
    let observed = u_doubled(xs, ys);
    let (mut le, mut ge, mut total) = (0u64, 0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != xs.len() {
            continue;
        }
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for (i, v) in pooled.iter().enumerate() {
            if mask & (1 << i) != 0 {
                a.push(*v)
            } else {
                b.push(*v)
            }
        }
        let u = u_doubled(&a, &b);
        total += 1;
        le += (u <= observed) as u64;
        ge += (u >= observed) as u64;
    }
    let (le, ge) = (le as f64 / total as f64, ge as f64 / total as f64);
    [(2.0 * le.min(ge)).min(1.0), le, ge]
}

fn cliffs_brute(xs: &[f64], ys: &[f64]) -> f64 {
    let mut s = 0i64;
    for x in xs {
        for y in ys {
            s += (x > y) as i64 - (x < y) as i64;
        }
    }
    s as f64 / (xs.len() * ys.len()) as f64
}

fn stats_oracles() -> Outcome {
    let mut tables = 0usize;
    let mut fisher_worst: f64 = 0.0;
    for a in 0..=40u64 {
        for b in 0..=40 - a {
            for c in 0..=40 - a - b {
                for d in 0..=40 - a - b - c {
                    if a + b + c + d == 0 {
                        continue;
                    }
                    let got = fisher_exact(a, b, c, d).map_err(|e| e.to_string())?.p_value;
                    fisher_worst = fisher_worst.max((got - fisher_brute(a, b, c, d)).abs());
                    tables += 1;
                }
            }
        }
    }

    let mut rng = 0x2545_f491_4f6c_dd1du64;
    let mut next = |m: u64| {
        rng ^= rng << 13;
        rng ^= rng >> 7;
        rng ^= rng << 17;
        rng % m
    };
    let mut mw_cases = 0;
    let mut mw_worst: f64 = 0.0;
    let mut cliff_worst: f64 = 0.0;
    for total in 2..=12u64 {
        for n in 1..total {
            for round in 0..6 {
                // even rounds draw from a narrow range to force ties
                let range = if round % 2 == 0 { 4 } else { 1000 };
                let xs: Vec<f64> = (0..n).map(|_| next(range) as f64).collect();
                let ys: Vec<f64> = (0..total - n).map(|_| next(range) as f64).collect();
                let want = mw_brute(&xs, &ys);
                for (alt, w) in [Alternative::TwoSided, Alternative::Less, Alternative::Greater].into_iter().zip(want) {
                    let got = mann_whitney(&xs, &ys, alt).map_err(|e| e.to_string())?.p_value;
                    mw_worst = mw_worst.max((got - w).abs());
                }
                let (delta, _) = cliffs_delta(&xs, &ys).map_err(|e| e.to_string())?;
                cliff_worst = cliff_worst.max((delta - cliffs_brute(&xs, &ys)).abs());
                mw_cases += 1;
            }
        }
    }
    check(
        fisher_worst <= 1e-9 && mw_worst <= 1e-9 && cliff_worst <= 1e-12,
        format!(
            "Fisher on {tables} tables max |dp| {fisher_worst:.1e}; Mann-Whitney on {mw_cases} sample pairs max |dp| {mw_worst:.1e}; Cliff's delta max |d| {cliff_worst:.1e}"
        ),
    )
}

fn read_tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).into_iter().flatten().flatten() {
            let p = entry.path();
            if p.is_dir() {
                stack.push(p);
            } else if let Ok(bytes) = std::fs::read(&p) {
                out.insert(p.strip_prefix(root).unwrap_or(&p).display().to_string(), bytes);
            }
        }
    }
    out
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let corpus = fixtures::write_filter_corpus(&dir.path().join("corpus")).map_err(|e| e.to_string())?;
    let graph = load_graph(&corpus.graph_dir).map_err(|e| e.to_string())?;
    let run = |out: &str, jobs: usize| {
        let store = JarStore::new(&corpus.jar_dir);
        let mut options = PipelineOptions::new(dir.path().join(out));
        options.jobs = Some(jobs);
        options.seed = 7;
        options.sample = vec!["all:0.95:0.05".parse().expect("sample spec")];
        run_pipeline(&graph, &store, &options).map_err(|e| e.to_string())
    };
    let first = run("a", 1)?;
    let second = run("b", 4)?;
    let (ta, tb) = (read_tree(&dir.path().join("a")), read_tree(&dir.path().join("b")));
    let identical = ta == tb;
    let s = &first.summary;
    let derived = derive_upgrades(&graph, &JarStore::new(&corpus.jar_dir));
    let reconciled = s.upgrades + s.excluded == s.candidates
        && s.candidates == derived.candidates()
        && s.excluded_by_reason.values().sum::<usize>() == s.excluded;
    check(
        identical && reconciled && first.summary == second.summary,
        format!(
            "{} output files identical across runs: {identical}; {} emitted + {} excluded = {} candidates",
            ta.len(),
            s.upgrades,
            s.excluded,
            s.candidates
        ),
    )
}

type Criterion = fn() -> Outcome;

fn main() {
    let criteria: [(&str, Criterion); 11] = [
        ("sampling sizes", cochran),
        ("odds ratios", odds_ratios),
        ("broken-client proportions", proportions),
        ("significance", significance),
        ("effect-size labels", effect_labels),
        ("benchmark arithmetic", bench_arithmetic),
        ("delta oracles", delta_oracles),
        ("detection oracles", detection_oracles),
        ("semver pipeline", semver_pipeline),
        ("statistics oracles", stats_oracles),
        ("pipeline determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (tag, msg) = match f() {
            Ok(m) => ("PASS", m),
            Err(m) => {
                failed += 1;
                ("FAIL", m)
            }
        };
        println!("criterion {:>2} {tag} {name}: {msg}", i + 1);
    }
    println!("{} of {} acceptance criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
