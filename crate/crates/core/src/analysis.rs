//! Tables and tests over pipeline results: upgrade ratios, yearly trends,
//! broken-client proportions per level, and detection-count comparisons.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{ClientRow, ClientStatus, CorpusSummary, UpgradeRow};
use crate::semver::SemverLevel;
use crate::stats::{
    breaking_ratio, chi_squared, cliffs_delta, distribution_summary, fisher_exact, holm_bonferroni, kruskal_wallis,
    mann_whitney, odds_ratio, percentage, significance_stars, Alternative, ContingencyTable, DistributionSummary,
    OddsRatio, RatioRow, TestResult,
};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Per-level client counts: all pairs, analysed pairs, broken pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelCounts {
    pub level: SemverLevel,
    pub population: u64,
    pub sample: u64,
    pub broken: u64,
}

impl LevelCounts {
    pub fn broken_pct(&self) -> Option<f64> {
        percentage(self.broken, self.sample)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairTest {
    pub a: SemverLevel,
    pub b: SemverLevel,
    pub result: TestResult,
    pub stars: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrokenClientTests {
    pub chi_squared: Option<TestResult>,
    /// Fisher exact test per pair with the odds ratio `odds(b) / odds(a)`
    /// as effect size.
    pub pairs: Vec<PairTest>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionTests {
    pub kruskal_wallis: Option<TestResult>,
    /// Two-sided Mann-Whitney per pair, Cliff's delta of `a` against `b`.
    pub pairs: Vec<PairTest>,
}

fn level_pairs(present: &[SemverLevel]) -> Vec<(SemverLevel, SemverLevel)> {
    let mut out = Vec::new();
    for (i, &a) in present.iter().enumerate() {
        for &b in &present[i + 1..] {
            out.push((a, b));
        }
    }
    out
}

fn adjust(pairs: &mut [PairTest]) {
    let ps: Vec<f64> = pairs.iter().map(|p| p.result.p_value).collect();
    for (p, adj) in pairs.iter_mut().zip(holm_bonferroni(&ps)) {
        p.result.adjusted_p = Some(adj);
        p.stars = significance_stars(adj).to_string();
    }
}

/// Chi-squared over broken/not-broken × level, then pairwise Fisher tests
/// with Holm-adjusted p-values and odds ratios.
pub fn broken_client_tests(counts: &[LevelCounts]) -> BrokenClientTests {
    let usable: Vec<&LevelCounts> = counts.iter().filter(|c| c.sample > 0).collect();
    let mut table = ContingencyTable::new();
    for c in &usable {
        table = table.row(c.level.as_str(), &[c.broken, c.sample - c.broken]);
    }
    let chi = chi_squared(&table).ok();
    let by_level: BTreeMap<SemverLevel, &LevelCounts> = usable.iter().map(|c| (c.level, *c)).collect();
    let present: Vec<SemverLevel> = SemverLevel::ALL.into_iter().filter(|l| by_level.contains_key(l)).collect();
    let mut pairs = Vec::new();
    for (a, b) in level_pairs(&present) {
        let (ca, cb) = (by_level[&a], by_level[&b]);
        let Ok(mut result) = fisher_exact(ca.broken, ca.sample - ca.broken, cb.broken, cb.sample - cb.broken) else {
            continue;
        };
        let or = odds_ratio(ca.broken, ca.sample, cb.broken, cb.sample).unwrap_or(OddsRatio::Undefined);
        result.effect_size = match or {
            OddsRatio::Finite(v) => Some(v),
            OddsRatio::Infinite => Some(f64::INFINITY),
            OddsRatio::Undefined => None,
        };
        pairs.push(PairTest { a, b, result, stars: String::new() });
    }
    adjust(&mut pairs);
    BrokenClientTests { chi_squared: chi, pairs }
}

/// Kruskal-Wallis over detection counts per level, then pairwise
/// Mann-Whitney tests with Holm adjustment and Cliff's delta.
pub fn detection_tests(groups: &BTreeMap<SemverLevel, Vec<f64>>) -> DetectionTests {
    let present: Vec<SemverLevel> =
        SemverLevel::ALL.into_iter().filter(|l| groups.get(l).is_some_and(|g| !g.is_empty())).collect();
    let samples: Vec<Vec<f64>> = present.iter().map(|l| groups[l].clone()).collect();
    let kw = kruskal_wallis(&samples).ok();
    let mut pairs = Vec::new();
    for (a, b) in level_pairs(&present) {
        let Ok(mut result) = mann_whitney(&groups[&a], &groups[&b], Alternative::TwoSided) else { continue };
        if let Ok((delta, magnitude)) = cliffs_delta(&groups[&a], &groups[&b]) {
            result.effect_size = Some(delta);
            result.interpretation = Some(magnitude.to_string());
        }
        pairs.push(PairTest { a, b, result, stars: String::new() });
    }
    adjust(&mut pairs);
    DetectionTests { kruskal_wallis: kw, pairs }
}

pub fn level_counts(clients: &[ClientRow]) -> Vec<LevelCounts> {
    SemverLevel::ALL
        .into_iter()
        .filter_map(|level| {
            let rows: Vec<&ClientRow> = clients.iter().filter(|c| c.level == level).collect();
            (!rows.is_empty()).then(|| LevelCounts {
                level,
                population: rows.len() as u64,
                sample: rows.iter().filter(|c| c.status == ClientStatus::Analysed).count() as u64,
                broken: rows.iter().filter(|c| c.broken).count() as u64,
            })
        })
        .collect()
}

/// Detection counts of broken clients per level.
pub fn detection_groups(clients: &[ClientRow]) -> BTreeMap<SemverLevel, Vec<f64>> {
    let mut out: BTreeMap<SemverLevel, Vec<f64>> = BTreeMap::new();
    for c in clients.iter().filter(|c| c.broken) {
        out.entry(c.level).or_default().push(c.detections as f64);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendRow {
    pub year: i32,
    pub level: SemverLevel,
    pub upgrades: u64,
    pub breaking: u64,
    pub breaking_pct: Option<f64>,
}

pub fn yearly_trend(upgrades: &[UpgradeRow]) -> Vec<TrendRow> {
    breaking_ratio(upgrades.iter().map(|u| ((u.year, u.level), u.breaking)))
        .into_iter()
        .map(|r| TrendRow {
            year: r.group.0,
            level: r.group.1,
            upgrades: r.count,
            breaking: r.breaking,
            breaking_pct: r.breaking_pct,
        })
        .collect()
}

/// Breaking share per level, plus the pooled non-major row (minor and
/// patch) and the total.
pub fn upgrade_ratios(upgrades: &[UpgradeRow], stable_only: bool) -> Vec<RatioRow<String>> {
    let flag = |u: &UpgradeRow| if stable_only { u.breaking_stable } else { u.breaking };
    let mut rows: Vec<RatioRow<String>> = breaking_ratio(upgrades.iter().map(|u| (u.level, flag(u))))
        .into_iter()
        .map(|r| RatioRow {
            group: r.group.as_str().to_string(),
            count: r.count,
            share: r.share,
            breaking: r.breaking,
            breaking_pct: r.breaking_pct,
        })
        .collect();
    let non_major: Vec<&UpgradeRow> =
        upgrades.iter().filter(|u| matches!(u.level, SemverLevel::Minor | SemverLevel::Patch)).collect();
    let total = upgrades.len() as u64;
    for (label, subset) in [("non-major", non_major), ("all", upgrades.iter().collect())] {
        let count = subset.len() as u64;
        let breaking = subset.iter().filter(|u| flag(u)).count() as u64;
        rows.push(RatioRow {
            group: label.to_string(),
            count,
            share: percentage(count, total),
            breaking,
            breaking_pct: percentage(breaking, count),
        });
    }
    rows
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub upgrade_ratios: Vec<RatioRow<String>>,
    pub stable_upgrade_ratios: Vec<RatioRow<String>>,
    pub trend: Vec<TrendRow>,
    pub bc_kinds: BTreeMap<String, usize>,
    pub level_counts: Vec<LevelCounts>,
    pub broken_clients: BrokenClientTests,
    pub detection_summaries: BTreeMap<SemverLevel, DistributionSummary>,
    pub detections: DetectionTests,
}

fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, AnalysisError> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| AnalysisError::Input { path: path.to_path_buf(), message: e.to_string() })?;
    rdr.deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(|e| AnalysisError::Input { path: path.to_path_buf(), message: e.to_string() })
}

/// Reads precomputed per-level counts (`level,population,sample,broken`).
pub fn read_level_counts(path: &Path) -> Result<Vec<LevelCounts>, AnalysisError> {
    if !path.exists() {
        return Err(AnalysisError::Input { path: path.to_path_buf(), message: "file not found".into() });
    }
    read_csv(path)
}

/// Builds the report from a pipeline output directory. `counts` replaces
/// the per-level client counts derived from `clients.csv`.
pub fn analyze(results: &Path, counts: Option<Vec<LevelCounts>>) -> Result<AnalysisReport, AnalysisError> {
    let upgrades: Vec<UpgradeRow> = read_csv(&results.join("upgrades.csv"))?;
    let clients: Vec<ClientRow> = read_csv(&results.join("clients.csv"))?;
    let summary_path = results.join("summary.json");
    let bc_kinds = match std::fs::read_to_string(&summary_path) {
        Ok(text) => {
            serde_json::from_str::<CorpusSummary>(&text)
                .map_err(|e| AnalysisError::Input { path: summary_path.clone(), message: e.to_string() })?
                .bc_histogram
        }
        Err(_) => BTreeMap::new(),
    };
    let level_counts = counts.unwrap_or_else(|| level_counts(&clients));
    let groups = detection_groups(&clients);
    let detection_summaries =
        groups.iter().filter_map(|(l, v)| distribution_summary(v).ok().map(|s| (*l, s))).collect();
    Ok(AnalysisReport {
        schema_version: REPORT_SCHEMA_VERSION,
        upgrade_ratios: upgrade_ratios(&upgrades, false),
        stable_upgrade_ratios: upgrade_ratios(&upgrades, true),
        trend: yearly_trend(&upgrades),
        bc_kinds,
        broken_clients: broken_client_tests(&level_counts),
        level_counts,
        detection_summaries,
        detections: detection_tests(&groups),
    })
}

fn fmt_opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(String::new, |v| format!("{v:.digits$}"))
}

fn fmt_p(p: f64) -> String {
    if p == 0.0 {
        "0".into()
    } else if p < 1e-3 {
        format!("{p:.2e}")
    } else {
        format!("{p:.3}")
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), AnalysisError> {
    std::fs::write(path, text).map_err(|source| AnalysisError::Io { path: path.to_path_buf(), source })
}

/// Writes the report as CSV tables, `report.json` and a Markdown narrative.
pub fn write_report(report: &AnalysisReport, out: &Path) -> Result<(), AnalysisError> {
    std::fs::create_dir_all(out).map_err(|source| AnalysisError::Io { path: out.to_path_buf(), source })?;

    let mut ratios = String::from("scope,group,upgrades,share_pct,breaking,breaking_pct\n");
    for (scope, rows) in [("all", &report.upgrade_ratios), ("stable", &report.stable_upgrade_ratios)] {
        for r in rows {
            let _ = writeln!(
                ratios,
                "{scope},{},{},{},{},{}",
                r.group,
                r.count,
                fmt_opt(r.share, 2),
                r.breaking,
                fmt_opt(r.breaking_pct, 2)
            );
        }
    }
    write_file(&out.join("ratios.csv"), &ratios)?;

    let mut trend = String::from("year,level,upgrades,breaking,breaking_pct\n");
    for t in &report.trend {
        let _ = writeln!(trend, "{},{},{},{},{}", t.year, t.level, t.upgrades, t.breaking, fmt_opt(t.breaking_pct, 2));
    }
    write_file(&out.join("trend.csv"), &trend)?;

    let mut kinds = String::from("bc_kind,count\n");
    for (k, n) in &report.bc_kinds {
        let _ = writeln!(kinds, "{k},{n}");
    }
    write_file(&out.join("bc_kinds.csv"), &kinds)?;

    let mut clients = String::from("level,population,sample,broken,broken_pct\n");
    for c in &report.level_counts {
        let _ =
            writeln!(clients, "{},{},{},{},{}", c.level, c.population, c.sample, c.broken, fmt_opt(c.broken_pct(), 1));
    }
    write_file(&out.join("broken_clients.csv"), &clients)?;

    let mut fisher = String::from("a,b,p_value,adjusted_p,odds_ratio,stars\n");
    for p in &report.broken_clients.pairs {
        let _ = writeln!(
            fisher,
            "{},{},{:e},{:e},{},{}",
            p.a,
            p.b,
            p.result.p_value,
            p.result.adjusted_p.unwrap_or(p.result.p_value),
            fmt_opt(p.result.effect_size, 4),
            p.stars
        );
    }
    write_file(&out.join("fisher.csv"), &fisher)?;

    let mut dist = String::from("level,min,q1,median,mean,q3,max\n");
    for (l, s) in &report.detection_summaries {
        let _ = writeln!(dist, "{l},{},{},{},{:.4},{},{}", s.min, s.q1, s.median, s.mean, s.q3, s.max);
    }
    write_file(&out.join("detections_by_level.csv"), &dist)?;

    let mut mw = String::from("a,b,u,p_value,adjusted_p,cliffs_delta,magnitude,stars\n");
    for p in &report.detections.pairs {
        let _ = writeln!(
            mw,
            "{},{},{},{:e},{:e},{},{},{}",
            p.a,
            p.b,
            p.result.statistic,
            p.result.p_value,
            p.result.adjusted_p.unwrap_or(p.result.p_value),
            fmt_opt(p.result.effect_size, 4),
            p.result.interpretation.as_deref().unwrap_or(""),
            p.stars
        );
    }
    write_file(&out.join("mann_whitney.csv"), &mw)?;

    let json = serde_json::to_string_pretty(report).expect("report serializes") + "\n";
    write_file(&out.join("report.json"), &json)?;
    write_file(&out.join("report.md"), &narrative(report))
}

pub fn narrative(report: &AnalysisReport) -> String {
    let mut md = String::from("# Upgrade analysis\n\n");
    let _ = writeln!(md, "Significance: `*` p < 0.1, `**` p < 0.05, `***` p < 0.01.\n");
    md.push_str("## Breaking upgrades per level\n\n| Level | Upgrades | Share | Breaking | Breaking % |\n|---|---|---|---|---|\n");
    for r in &report.upgrade_ratios {
        let _ = writeln!(
            md,
            "| {} | {} | {} | {} | {} |",
            r.group,
            r.count,
            fmt_opt(r.share, 1),
            r.breaking,
            fmt_opt(r.breaking_pct, 1)
        );
    }
    md.push_str(
        "\n## Broken clients per level\n\n| Level | Population | Sample | Broken | % |\n|---|---|---|---|---|\n",
    );
    for c in &report.level_counts {
        let _ = writeln!(
            md,
            "| {} | {} | {} | {} | {} |",
            c.level,
            c.population,
            c.sample,
            c.broken,
            fmt_opt(c.broken_pct(), 1)
        );
    }
    if let Some(chi) = &report.broken_clients.chi_squared {
        let _ = writeln!(
            md,
            "\nChi-squared = {:.2} (df {}), p = {} {}",
            chi.statistic,
            chi.df.unwrap_or(0.0),
            fmt_p(chi.p_value),
            significance_stars(chi.p_value)
        );
    }
    if !report.broken_clients.pairs.is_empty() {
        md.push_str("\n| Levels | Adjusted p | Odds ratio |\n|---|---|---|\n");
        for p in &report.broken_clients.pairs {
            let _ = writeln!(
                md,
                "| {} vs {} | {} {} | {} |",
                p.a,
                p.b,
                fmt_p(p.result.adjusted_p.unwrap_or(p.result.p_value)),
                p.stars,
                fmt_opt(p.result.effect_size, 2)
            );
        }
    }
    md.push_str("\n## Detections per broken client\n");
    if let Some(kw) = &report.detections.kruskal_wallis {
        let _ = writeln!(
            md,
            "\nKruskal-Wallis H = {:.2}, p = {} {}",
            kw.statistic,
            fmt_p(kw.p_value),
            significance_stars(kw.p_value)
        );
    }
    if !report.detections.pairs.is_empty() {
        md.push_str("\n| Levels | Adjusted p | Cliff's delta |\n|---|---|---|\n");
        for p in &report.detections.pairs {
            let _ = writeln!(
                md,
                "| {} vs {} | {} {} | {} ({}) |",
                p.a,
                p.b,
                fmt_p(p.result.adjusted_p.unwrap_or(p.result.p_value)),
                p.stars,
                fmt_opt(p.result.effect_size, 2),
                p.result.interpretation.as_deref().unwrap_or("")
            );
        }
    }
    md
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(rows: &[(SemverLevel, u64, u64, u64)]) -> Vec<LevelCounts> {
        rows.iter()
            .map(|&(level, population, sample, broken)| LevelCounts { level, population, sample, broken })
            .collect()
    }

    #[test]
    fn empty_inputs_give_empty_report() {
        let dir = tempfile::tempdir().unwrap();
        let report = analyze(dir.path(), None).unwrap();
        assert!(report.level_counts.is_empty());
        assert!(report.broken_clients.chi_squared.is_none());
        assert!(report.detections.pairs.is_empty());
        write_report(&report, &dir.path().join("out")).unwrap();
        assert!(dir.path().join("out/report.md").exists());
    }

    #[test]
    fn pairwise_fisher_direction() {
        use SemverLevel::*;
        let t = broken_client_tests(&counts(&[(Major, 100, 100, 30), (Minor, 100, 100, 10)]));
        assert_eq!(t.pairs.len(), 1);
        let or = t.pairs[0].result.effect_size.unwrap();
        assert!((or - (10.0 / 90.0) / (30.0 / 70.0)).abs() < 1e-12);
        assert!(t.chi_squared.is_some());
    }
}
