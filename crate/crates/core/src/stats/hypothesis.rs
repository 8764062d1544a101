use std::cmp::Ordering;

use super::special::{chi2_sf, ln_choose, normal_cdf, normal_sf};
use super::{StatsError, TestResult};

/// Rows of labelled counts, e.g. semver level → (broken, not broken).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ContingencyTable {
    pub rows: Vec<(String, Vec<u64>)>,
}

impl ContingencyTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn row(mut self, label: &str, counts: &[u64]) -> Self {
        self.rows.push((label.to_string(), counts.to_vec()));
        self
    }
}

/// Pearson's chi-squared test of independence.
pub fn chi_squared(table: &ContingencyTable) -> Result<TestResult, StatsError> {
    let r = table.rows.len();
    let k = table.rows.first().map_or(0, |(_, c)| c.len());
    if r < 2 || k < 2 || table.rows.iter().any(|(_, c)| c.len() != k) {
        return Err(StatsError::DegenerateTable("need at least a 2x2 table with equal row widths".into()));
    }
    let row_sums: Vec<f64> = table.rows.iter().map(|(_, c)| c.iter().sum::<u64>() as f64).collect();
    let col_sums: Vec<f64> = (0..k).map(|j| table.rows.iter().map(|(_, c)| c[j]).sum::<u64>() as f64).collect();
    let total: f64 = row_sums.iter().sum();
    let mut statistic = 0.0;
    for (i, (_, counts)) in table.rows.iter().enumerate() {
        for (j, &observed) in counts.iter().enumerate() {
            let expected = row_sums[i] * col_sums[j] / total;
            if expected <= 0.0 || expected.is_nan() {
                return Err(StatsError::DegenerateTable("an expected count is zero".into()));
            }
            statistic += (observed as f64 - expected).powi(2) / expected;
        }
    }
    let df = ((r - 1) * (k - 1)) as f64;
    Ok(TestResult { statistic, df: Some(df), p_value: chi2_sf(statistic, df).clamp(0.0, 1.0), ..Default::default() })
}

/// Relative tolerance when deciding that a table is as extreme as the
/// observed one.
const FISHER_REL_TOL: f64 = 1e-7;

/// Two-sided Fisher exact test on `[[a, b], [c, d]]`: sums the
/// hypergeometric probabilities of all tables with the same margins that
/// are no more probable than the observed one. The statistic is the
/// probability of the observed table.
pub fn fisher_exact(a: u64, b: u64, c: u64, d: u64) -> Result<TestResult, StatsError> {
    let r1 = a + b;
    let r2 = c + d;
    let c1 = a + c;
    let n = r1 + r2;
    if n == 0 {
        return Err(StatsError::DegenerateTable("empty table".into()));
    }
    let denom = ln_choose(n, c1);
    let log_p = |x: u64| ln_choose(r1, x) + ln_choose(r2, c1 - x) - denom;
    let observed = log_p(a);
    let threshold = observed + FISHER_REL_TOL.ln_1p();
    let lo = c1.saturating_sub(r2);
    let hi = r1.min(c1);
    let p: f64 = (lo..=hi).map(log_p).filter(|&lp| lp <= threshold).map(f64::exp).sum();
    Ok(TestResult { statistic: observed.exp(), p_value: p.min(1.0), ..Default::default() })
}

/// Odds ratio of group `b` against group `a`: `odds(b) / odds(a)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OddsRatio {
    Finite(f64),
    /// Group `a` has zero odds (or `b` never fails) while the other is positive.
    Infinite,
    /// Both odds are zero or both infinite.
    Undefined,
}

impl OddsRatio {
    pub fn value(self) -> Option<f64> {
        match self {
            OddsRatio::Finite(v) => Some(v),
            _ => None,
        }
    }
}

pub fn odds_ratio(a_broken: u64, a_total: u64, b_broken: u64, b_total: u64) -> Result<OddsRatio, StatsError> {
    if a_broken > a_total || b_broken > b_total {
        return Err(StatsError::Domain("broken count exceeds total".into()));
    }
    let num = b_broken as f64 * (a_total - a_broken) as f64;
    let den = (b_total - b_broken) as f64 * a_broken as f64;
    Ok(match (num == 0.0, den == 0.0) {
        (true, true) => OddsRatio::Undefined,
        (false, true) => OddsRatio::Infinite,
        _ => OddsRatio::Finite(num / den),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alternative {
    TwoSided,
    /// `xs` tends to be smaller than `ys`.
    Less,
    /// `xs` tends to be larger than `ys`.
    Greater,
}

/// Mid-ranks (1-based) of the pooled sample, doubled so ties stay integral.
fn doubled_ranks(values: &[f64]) -> Vec<u64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap_or(Ordering::Equal));
    let mut ranks = vec![0u64; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        // positions i..=j share the mean of ranks i+1..=j+1
        let doubled = (i + 1 + j + 1) as u64;
        for &k in &idx[i..=j] {
            ranks[k] = doubled;
        }
        i = j + 1;
    }
    ranks
}

fn tie_sizes(values: &[f64]) -> Vec<u64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let mut out = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        out.push((j - i + 1) as u64);
        i = j + 1;
    }
    out
}

/// Largest per-sample size handled exactly.
pub const EXACT_MAX_N: usize = 20;

/// Mann-Whitney U test. `statistic` is U for `xs`. Samples of at most
/// [`EXACT_MAX_N`] each use the exact permutation distribution of the
/// (mid-)rank sum, ties included; larger samples use the tie-corrected
/// normal approximation with continuity correction.
pub fn mann_whitney(xs: &[f64], ys: &[f64], alternative: Alternative) -> Result<TestResult, StatsError> {
    if xs.is_empty() || ys.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let (n1, n2) = (xs.len(), ys.len());
    let pooled: Vec<f64> = xs.iter().chain(ys).copied().collect();
    let ranks = doubled_ranks(&pooled);
    let w2: u64 = ranks[..n1].iter().sum();
    let u = w2 as f64 / 2.0 - (n1 * (n1 + 1)) as f64 / 2.0;
    let n = n1 + n2;

    let p_value = if n1 <= EXACT_MAX_N && n2 <= EXACT_MAX_N {
        let (le, ge) = exact_tails(&ranks, n1, w2);
        match alternative {
            Alternative::TwoSided => (2.0 * le.min(ge)).min(1.0),
            Alternative::Less => le,
            Alternative::Greater => ge,
        }
    } else {
        let ties = tie_sizes(&pooled);
        let mu = (n1 * n2) as f64 / 2.0;
        let nf = n as f64;
        let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / (nf * (nf - 1.0));
        let sigma = ((n1 * n2) as f64 / 12.0 * ((nf + 1.0) - tie_term)).sqrt();
        if sigma == 0.0 {
            1.0
        } else {
            match alternative {
                Alternative::TwoSided => {
                    let z = ((u - mu).abs() - 0.5).max(0.0) / sigma;
                    (2.0 * normal_sf(z)).min(1.0)
                }
                Alternative::Greater => normal_sf((u - mu - 0.5) / sigma),
                Alternative::Less => normal_cdf((u - mu + 0.5) / sigma),
            }
        }
    };
    Ok(TestResult { statistic: u, p_value: p_value.clamp(0.0, 1.0), ..Default::default() })
}

/// `P(S <= observed)` and `P(S >= observed)` where `S` sums `k` of the
/// pooled (doubled) ranks chosen uniformly at random. Counts subsets by
/// size and sum; with at most 40 items every count is exact in an `f64`.
fn exact_tails(ranks: &[u64], k: usize, observed: u64) -> (f64, f64) {
    let max_sum: u64 = ranks.iter().sum();
    let width = max_sum as usize + 1;
    // ways[j * width + s]: subsets of size j with sum s
    let mut ways = vec![0f64; (k + 1) * width];
    ways[0] = 1.0;
    for (i, &r) in ranks.iter().enumerate() {
        let r = r as usize;
        for j in (1..=k.min(i + 1)).rev() {
            let (lower, upper) = ways.split_at_mut(j * width);
            let prev = &lower[(j - 1) * width..];
            let cur = &mut upper[..width];
            for s in (r..width).rev() {
                cur[s] += prev[s - r];
            }
        }
    }
    let row = &ways[k * width..];
    let total: f64 = row.iter().sum();
    let w = observed as usize;
    let le: f64 = row[..=w.min(width - 1)].iter().sum();
    let ge: f64 = row[w.min(width)..].iter().sum();
    (le / total, ge / total)
}

/// Kruskal-Wallis rank-sum test with tie correction; p from the chi-square
/// distribution with `groups - 1` degrees of freedom.
pub fn kruskal_wallis(groups: &[Vec<f64>]) -> Result<TestResult, StatsError> {
    if groups.len() < 2 {
        return Err(StatsError::Domain("need at least two groups".into()));
    }
    if groups.iter().any(Vec::is_empty) {
        return Err(StatsError::EmptyInput);
    }
    let pooled: Vec<f64> = groups.iter().flatten().copied().collect();
    let n = pooled.len() as f64;
    let ranks = doubled_ranks(&pooled);
    let mut offset = 0;
    let mut sum = 0.0;
    for g in groups {
        let r: f64 = ranks[offset..offset + g.len()].iter().map(|&d| d as f64 / 2.0).sum();
        sum += r * r / g.len() as f64;
        offset += g.len();
    }
    let h = 12.0 / (n * (n + 1.0)) * sum - 3.0 * (n + 1.0);
    let ties: f64 = tie_sizes(&pooled).iter().map(|&t| (t * t * t - t) as f64).sum();
    let correction = 1.0 - ties / (n * n * n - n);
    let df = (groups.len() - 1) as f64;
    if correction <= 0.0 {
        return Ok(TestResult { statistic: 0.0, df: Some(df), p_value: 1.0, ..Default::default() });
    }
    let h = (h / correction).max(0.0);
    Ok(TestResult { statistic: h, df: Some(df), p_value: chi2_sf(h, df).clamp(0.0, 1.0), ..Default::default() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fisher_examples() {
        assert!((fisher_exact(5, 5, 5, 5).unwrap().p_value - 1.0).abs() < 1e-12);
        assert!((fisher_exact(1, 9, 11, 3).unwrap().p_value - 0.002_759_456).abs() < 1e-8);
        assert!(fisher_exact(0, 0, 0, 0).is_err());
    }

    #[test]
    fn odds_ratio_cases() {
        let or = odds_ratio(1250, 10663, 1130, 14445).unwrap().value().unwrap();
        assert!((or - 0.64).abs() < 0.005);
        assert_eq!(odds_ratio(3, 10, 3, 10).unwrap(), OddsRatio::Finite(1.0));
        assert_eq!(odds_ratio(0, 10, 3, 10).unwrap(), OddsRatio::Infinite);
        assert_eq!(odds_ratio(0, 10, 0, 10).unwrap(), OddsRatio::Undefined);
        assert!(odds_ratio(11, 10, 0, 10).is_err());
    }

    #[test]
    fn mann_whitney_small() {
        let r = mann_whitney(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], Alternative::TwoSided).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 0.1).abs() < 1e-12);
        let one = mann_whitney(&[1.0], &[1.0], Alternative::TwoSided).unwrap();
        assert_eq!(one.p_value, 1.0);
        let less = mann_whitney(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], Alternative::Less).unwrap();
        assert!((less.p_value - 0.05).abs() < 1e-12);
    }

    #[test]
    fn chi_squared_identical_rows() {
        let t = ContingencyTable::new().row("a", &[10, 20]).row("b", &[5, 10]);
        let r = chi_squared(&t).unwrap();
        assert!(r.statistic.abs() < 1e-12);
        assert!((r.p_value - 1.0).abs() < 1e-12);
        assert!(chi_squared(&ContingencyTable::new().row("a", &[0, 0]).row("b", &[1, 1])).is_err());
    }

    #[test]
    fn kruskal_identical_groups() {
        let g = vec![vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0]];
        let r = kruskal_wallis(&g).unwrap();
        assert!(r.statistic.abs() < 1e-12);
        assert!((r.p_value - 1.0).abs() < 1e-12);
    }
}
