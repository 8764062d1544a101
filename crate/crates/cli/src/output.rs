//! Rendering of command results on stdout.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use breakscope_core::benchmark::AccuracyReport;
use breakscope_core::corpus::{CorpusSummary, Derivation, ExclusionReason, EXCLUSIONS_HEADER};
use breakscope_core::semver::Verdict;
use breakscope_core::{BreakingChange, Delta, Detection, ImpactSummary, SemverLevel, Version};

pub const DETECT_SCHEMA_VERSION: u32 = 1;
pub const CLASSIFY_SCHEMA_VERSION: u32 = 1;
pub const DERIVE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
    Csv,
}

pub fn json<T: Serialize>(value: &T) {
    outln!("{}", serde_json::to_string_pretty(value).expect("report serializes"));
}

fn csv_out(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) {
    let mut w = csv::Writer::from_writer(std::io::stdout());
    let _ = w.write_record(header);
    for r in rows {
        let _ = w.write_record(&r);
    }
    let _ = w.flush();
}

fn stability(c: &BreakingChange) -> &'static str {
    if c.stability.is_stable() {
        "stable"
    } else {
        "unstable"
    }
}

pub fn delta(delta: &Delta, format: Format) {
    match format {
        Format::Json => outln!("{}", delta.to_json()),
        Format::Csv => csv_out(
            &["kind", "element", "stability", "affected_type"],
            delta.changes.iter().map(|c| {
                vec![
                    c.kind.name().to_string(),
                    c.element.to_string(),
                    stability(c).to_string(),
                    c.detail.affected_type.clone().unwrap_or_default(),
                ]
            }),
        ),
        Format::Text => {
            let stable = delta.stable_changes().count();
            outln!(
                "{} -> {}: {} breaking change(s), {stable} on stable API",
                delta.old,
                delta.new,
                delta.changes.len()
            );
            for c in &delta.changes {
                let mut line = format!("  {:<34} {}", c.kind.name(), c.element);
                if let Some(t) = &c.detail.affected_type {
                    line.push_str(&format!(" (via {t})"));
                }
                if !c.stability.is_stable() {
                    line.push_str(" [unstable]");
                }
                outln!("{line}");
            }
        }
    }
}

#[derive(Serialize)]
struct DetectReport<'a> {
    schema_version: u32,
    old: &'a str,
    new: &'a str,
    client: &'a str,
    broken: bool,
    summary: &'a ImpactSummary,
    detections: &'a [Detection],
}

pub fn detections(
    delta: &Delta,
    client: &str,
    found: &[Detection],
    summary: &ImpactSummary,
    broken: bool,
    format: Format,
) {
    match format {
        Format::Json => json(&DetectReport {
            schema_version: DETECT_SCHEMA_VERSION,
            old: &delta.old,
            new: &delta.new,
            client,
            broken,
            summary,
            detections: found,
        }),
        Format::Csv => csv_out(
            &["client_element", "library_element", "use_kind", "bc_kind", "confidence", "rule"],
            found.iter().map(|d| {
                vec![
                    d.client.to_string(),
                    d.library.to_string(),
                    format!("{:?}", d.use_kind),
                    d.bc_kind.name().to_string(),
                    format!("{:?}", d.confidence).to_lowercase(),
                    d.rule.map(|r| format!("{r:?}")).unwrap_or_default(),
                ]
            }),
        ),
        Format::Text => {
            outln!(
                "{client} against {} -> {}: {}, {} detection(s) ({} certain, {} pessimistic)",
                delta.old,
                delta.new,
                if broken { "broken" } else { "not broken" },
                summary.detections,
                summary.certain,
                summary.pessimistic
            );
            for d in found {
                let rule = d.rule.map(|r| format!(" [{r:?}]")).unwrap_or_default();
                outln!("  {} -> {} ({:?}, {}){rule}", d.client, d.library, d.use_kind, d.bc_kind.name());
            }
        }
    }
}

fn verdict_hint(v: &Version) -> Option<String> {
    let why = match v.verdict {
        Verdict::Compliant => return None,
        Verdict::Qualified => "carries a qualifier",
        Verdict::DateLike => "looks like a date",
        Verdict::TooFew => "has a single numeric component",
        Verdict::TooMany => "has more than three numeric components",
    };
    Some(format!("`{}` {why}", v.raw))
}

#[derive(Serialize)]
struct Classification<'a> {
    schema_version: u32,
    v1: &'a str,
    v2: &'a str,
    level: Option<SemverLevel>,
    v1_verdict: Verdict,
    v2_verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<&'a str>,
}

pub fn classification(a: &Version, b: &Version, level: Option<SemverLevel>, error: Option<&str>, as_json: bool) {
    if as_json {
        json(&Classification {
            schema_version: CLASSIFY_SCHEMA_VERSION,
            v1: &a.raw,
            v2: &b.raw,
            level,
            v1_verdict: a.verdict,
            v2_verdict: b.verdict,
            error,
        });
    } else if let Some(level) = level {
        outln!("{}", level.as_str());
    } else {
        for hint in [a, b].into_iter().filter_map(verdict_hint) {
            eprintln!("hint: {hint}");
        }
    }
}

#[derive(Serialize)]
struct DerivationSummary {
    schema_version: u32,
    candidates: usize,
    upgrades: usize,
    excluded: usize,
    upgrades_by_level: BTreeMap<SemverLevel, usize>,
    excluded_by_reason: BTreeMap<ExclusionReason, usize>,
}

/// Writes `upgrades.csv` and `exclusions.csv` into `out` and prints a
/// summary.
pub fn derivation(d: &Derivation, out: &Path, as_json: bool) -> Result<(), String> {
    let err = |e: &dyn std::fmt::Display| format!("{}: {e}", out.display());
    std::fs::create_dir_all(out).map_err(|e| err(&e))?;
    let mut w = csv::Writer::from_path(out.join("upgrades.csv")).map_err(|e| err(&e))?;
    w.write_record(["library", "v1", "v2", "level"]).map_err(|e| err(&e))?;
    for u in &d.upgrades {
        w.write_record([u.library.to_string().as_str(), &u.v1.raw, &u.v2.raw, u.level.as_str()])
            .map_err(|e| err(&e))?;
    }
    w.flush().map_err(|e| err(&e))?;
    let mut w =
        csv::WriterBuilder::new().has_headers(false).from_path(out.join("exclusions.csv")).map_err(|e| err(&e))?;
    w.write_record(EXCLUSIONS_HEADER).map_err(|e| err(&e))?;
    for e in &d.exclusions {
        w.serialize(e).map_err(|e| err(&e))?;
    }
    w.flush().map_err(|e| err(&e))?;

    let mut upgrades_by_level = BTreeMap::new();
    for u in &d.upgrades {
        *upgrades_by_level.entry(u.level).or_insert(0) += 1;
    }
    let summary = DerivationSummary {
        schema_version: DERIVE_SCHEMA_VERSION,
        candidates: d.candidates(),
        upgrades: d.upgrades.len(),
        excluded: d.exclusions.len(),
        upgrades_by_level,
        excluded_by_reason: d.excluded_by_reason(),
    };
    if as_json {
        json(&summary);
    } else {
        outln!("{} candidates: {} upgrades, {} excluded", summary.candidates, summary.upgrades, summary.excluded);
        for (reason, n) in &summary.excluded_by_reason {
            outln!("  {:<24} {n}", reason.as_str());
        }
    }
    Ok(())
}

pub fn summary(s: &CorpusSummary, as_json: bool) {
    if as_json {
        json(s);
        return;
    }
    outln!("{} candidates: {} upgrades, {} excluded", s.candidates, s.upgrades, s.excluded);
    for (level, n) in &s.upgrades_by_level {
        let breaking = s.breaking_by_level.get(level).copied().unwrap_or(0);
        outln!("  {:<6} {n} upgrades, {breaking} breaking", level.as_str());
    }
    outln!("{} client pairs, {} analysed, {} broken", s.client_pairs, s.analysed_clients, s.broken_clients);
}

pub fn bench(r: &AccuracyReport, as_json: bool) {
    if as_json {
        json(r);
        return;
    }
    for o in &r.outcomes {
        let mut line = format!("{:<40} {:?}", o.id, o.verdict);
        for fp in &o.false_positives {
            let rules: Vec<String> = fp.rules.iter().map(|r| format!("{r:?}")).collect();
            line.push_str(&format!(
                "  fp {} -> {} [{}]",
                fp.client_element,
                fp.library_element,
                if rules.is_empty() { "no rule".to_string() } else { rules.join(",") }
            ));
        }
        if let Some(g) = o.gap {
            line.push_str(&format!("  known gap: {g:?}"));
        }
        if let Some(e) = &o.error {
            line.push_str(&format!("  {e}"));
        }
        outln!("{line}");
    }
    outln!(
        "{} cases ({} invalid), tp {} fp {} fn {}: precision {:.1}%, recall {:.1}% ({:.1}% excluding known gaps)",
        r.cases,
        r.invalid,
        r.tp,
        r.fp,
        r.fn_,
        r.precision * 100.0,
        r.recall * 100.0,
        r.recall_excluding_gaps * 100.0
    );
}
