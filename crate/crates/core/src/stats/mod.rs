//! Sampling, ratios, hypothesis tests and effect sizes.

mod hypothesis;
pub mod special;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use hypothesis::{
    chi_squared, fisher_exact, kruskal_wallis, mann_whitney, odds_ratio, Alternative, ContingencyTable, OddsRatio,
    EXACT_MAX_N,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("argument out of range: {0}")]
    Domain(String),
    #[error("degenerate table: {0}")]
    DegenerateTable(String),
    #[error("empty input")]
    EmptyInput,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub df: Option<f64>,
    pub p_value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adjusted_p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effect_size: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interpretation: Option<String>,
}

/// Cochran's sample size with finite-population correction:
/// `n0 = z² p (1 - p) / e²`, `n = n0 / (1 + (n0 - 1) / N)`, rounded half up
/// and kept within `1..=N`.
pub fn cochran_sample(population: u64, confidence: f64, margin: f64, proportion: f64) -> Result<u64, StatsError> {
    if population == 0 {
        return Err(StatsError::Domain("population must be at least 1".into()));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(StatsError::Domain(format!("confidence {confidence} not in (0, 1)")));
    }
    if !(margin > 0.0 && margin < 1.0) {
        return Err(StatsError::Domain(format!("margin {margin} not in (0, 1)")));
    }
    if !(0.0..=1.0).contains(&proportion) {
        return Err(StatsError::Domain(format!("proportion {proportion} not in [0, 1]")));
    }
    let z = special::normal_quantile(1.0 - (1.0 - confidence) / 2.0);
    let n0 = z * z * proportion * (1.0 - proportion) / (margin * margin);
    let n = n0 / (1.0 + (n0 - 1.0) / population as f64);
    let rounded = (n + 0.5).floor();
    Ok((rounded.max(1.0) as u64).min(population))
}

/// Percentage, or `None` when the denominator is zero.
pub fn percentage(part: u64, whole: u64) -> Option<f64> {
    (whole > 0).then(|| 100.0 * part as f64 / whole as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRow<K> {
    pub group: K,
    pub count: u64,
    /// Share of all items, in percent.
    pub share: Option<f64>,
    pub breaking: u64,
    /// Breaking items within the group, in percent.
    pub breaking_pct: Option<f64>,
}

/// Count and breaking share per group, in key order.
pub fn breaking_ratio<K: Ord + Clone>(items: impl IntoIterator<Item = (K, bool)>) -> Vec<RatioRow<K>> {
    let mut groups: BTreeMap<K, (u64, u64)> = BTreeMap::new();
    let mut total = 0;
    for (k, breaking) in items {
        let e = groups.entry(k).or_default();
        e.0 += 1;
        e.1 += u64::from(breaking);
        total += 1;
    }
    groups
        .into_iter()
        .map(|(group, (count, breaking))| RatioRow {
            group,
            count,
            share: percentage(count, total),
            breaking,
            breaking_pct: percentage(breaking, count),
        })
        .collect()
}

/// Holm's step-down adjustment, returned in input order.
pub fn holm_bonferroni(p_values: &[f64]) -> Vec<f64> {
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]));
    let mut adjusted = vec![0.0; m];
    let mut running: f64 = 0.0;
    for (rank, &i) in order.iter().enumerate() {
        let v = ((m - rank) as f64 * p_values[i]).min(1.0);
        running = running.max(v);
        adjusted[i] = running;
    }
    adjusted
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Magnitude {
    Negligible,
    Small,
    Medium,
    Large,
}

impl fmt::Display for Magnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Magnitude::Negligible => "negligible",
            Magnitude::Small => "small",
            Magnitude::Medium => "medium",
            Magnitude::Large => "large",
        })
    }
}

/// Thresholds on |δ|: 0.147, 0.33, 0.474.
pub fn interpret_cliffs_delta(delta: f64) -> Magnitude {
    let d = delta.abs();
    if d < 0.147 {
        Magnitude::Negligible
    } else if d < 0.33 {
        Magnitude::Small
    } else if d < 0.474 {
        Magnitude::Medium
    } else {
        Magnitude::Large
    }
}

/// Cliff's delta `(#(x > y) - #(x < y)) / (|xs| |ys|)`, counted with a
/// sorted copy of `ys` and binary search.
pub fn cliffs_delta(xs: &[f64], ys: &[f64]) -> Result<(f64, Magnitude), StatsError> {
    if xs.is_empty() || ys.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let mut sorted = ys.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut dominance: i64 = 0;
    for &x in xs {
        let below = sorted.partition_point(|&y| y < x) as i64;
        let not_above = sorted.partition_point(|&y| y <= x) as i64;
        let above = sorted.len() as i64 - not_above;
        dominance += below - above;
    }
    let d = dominance as f64 / (xs.len() * ys.len()) as f64;
    Ok((d, interpret_cliffs_delta(d)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionSummary {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub mean: f64,
    pub q3: f64,
    pub max: f64,
}

/// Quantile of sorted data by linear interpolation between closest ranks
/// (`h = (n - 1) p`).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn distribution_summary(values: &[f64]) -> Result<DistributionSummary, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(DistributionSummary {
        min: sorted[0],
        q1: quantile_sorted(&sorted, 0.25),
        median: quantile_sorted(&sorted, 0.5),
        mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
        q3: quantile_sorted(&sorted, 0.75),
        max: sorted[sorted.len() - 1],
    })
}

/// `***` for p < 0.01, `**` for p < 0.05, `*` for p < 0.1.
pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.1 {
        "*"
    } else {
        ""
    }
}
