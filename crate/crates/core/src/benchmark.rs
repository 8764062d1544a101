//! Accuracy of the detector against cases whose linker errors are known.
//!
//! A case is a library pair, one client JAR and an entry point. Detections
//! and the oracle are compared as distinct (client element, library
//! element) pairs, restricted to the entry point's type.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::apimodel::{build_model, ElementRef, StabilityConfig};
use crate::classfile::open_jar;
use crate::delta::{compute_delta, BcKind};
use crate::detect::{compute_detections, Confidence, PessimisticRule};
use crate::usage::extract_usage;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// The linker error a JVM raises when the entry point runs against `v2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OracleRecord {
    pub error_class: String,
    pub client_element: ElementRef,
    pub library_element: ElementRef,
}

/// Known blind spots: changes outside the catalog that still fail at link
/// time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gap {
    Native,
    Strictfp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BenchCase {
    pub id: String,
    pub v1: PathBuf,
    pub v2: PathBuf,
    pub client: PathBuf,
    pub entry: ElementRef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_kind: Option<BcKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap: Option<Gap>,
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Manifest { path: String, message: String },
}

/// Reads a manifest; JAR paths are resolved against its directory.
pub fn load_manifest(path: &Path) -> Result<Vec<BenchCase>, BenchError> {
    let text =
        std::fs::read_to_string(path).map_err(|source| BenchError::Io { path: path.display().to_string(), source })?;
    let mut cases: Vec<BenchCase> = serde_json::from_str(&text)
        .map_err(|e| BenchError::Manifest { path: path.display().to_string(), message: e.to_string() })?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut seen = BTreeSet::new();
    for c in &mut cases {
        if !seen.insert(c.id.clone()) {
            return Err(BenchError::Manifest {
                path: path.display().to_string(),
                message: format!("duplicate case `{}`", c.id),
            });
        }
        for p in [&mut c.v1, &mut c.v2, &mut c.client] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
    Ok(cases)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// The oracle error was detected and nothing else was reported.
    Correct,
    /// No error expected and none reported.
    Clean,
    /// Something was reported beyond the oracle.
    FalsePositive,
    /// The oracle error was missed.
    FalseNegative,
    /// Both missed and spurious pairs.
    Mixed,
    /// A JAR could not be read.
    Invalid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FalsePositive {
    pub client_element: ElementRef,
    pub library_element: ElementRef,
    pub bc_kinds: Vec<BcKind>,
    /// Pessimistic rules behind the pair; empty when a certain clause
    /// fired.
    pub rules: Vec<PessimisticRule>,
}

impl FalsePositive {
    pub fn is_attributed(&self) -> bool {
        !self.rules.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseOutcome {
    pub id: String,
    pub verdict: Verdict,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub bc_kinds: Vec<BcKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap: Option<Gap>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub false_positives: Vec<FalsePositive>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub schema_version: u32,
    pub cases: usize,
    pub invalid: usize,
    pub oracle_errors: usize,
    pub detections: usize,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    /// Recall with false negatives on known gaps discounted.
    pub recall_excluding_gaps: f64,
    pub fp_by_rule: BTreeMap<String, usize>,
    pub unattributed_fp: usize,
    pub outcomes: Vec<CaseOutcome>,
}

/// Precision and recall; an empty denominator scores 1.
pub fn score(tp: usize, fp: usize, fn_: usize) -> (f64, f64) {
    let ratio = |num: usize, den: usize| if den == 0 { 1.0 } else { num as f64 / den as f64 };
    (ratio(tp, tp + fp), ratio(tp, tp + fn_))
}

type PairFindings = (BTreeSet<BcKind>, BTreeSet<PessimisticRule>, bool);

pub fn run_case(case: &BenchCase, config: &StabilityConfig) -> CaseOutcome {
    let mut outcome = CaseOutcome {
        id: case.id.clone(),
        verdict: Verdict::Invalid,
        tp: 0,
        fp: 0,
        fn_: 0,
        bc_kinds: Vec::new(),
        gap: case.gap,
        false_positives: Vec::new(),
        error: None,
    };
    let loaded = (|| {
        let v1 = open_jar(&case.v1).map_err(|e| e.to_string())?;
        let v2 = open_jar(&case.v2).map_err(|e| e.to_string())?;
        let client = open_jar(&case.client).map_err(|e| e.to_string())?;
        Ok::<_, String>((v1, v2, client))
    })();
    let (v1, v2, client) = match loaded {
        Ok(t) => t,
        Err(e) => {
            outcome.error = Some(e);
            return outcome;
        }
    };
    let old = build_model(&v1, config);
    let new = build_model(&v2, config);
    let delta = compute_delta(&old, &new);
    outcome.bc_kinds = delta.changes.iter().map(|c| c.kind).collect::<BTreeSet<_>>().into_iter().collect();
    let usage = extract_usage(&client, &old);
    let detections = match compute_detections(&delta, &usage) {
        Ok(d) => d,
        Err(e) => {
            outcome.error = Some(e.to_string());
            return outcome;
        }
    };

    let entry_type = case.entry.type_name();
    // per pair: kinds, pessimistic rules, and whether a certain clause fired
    let mut pairs: BTreeMap<(ElementRef, ElementRef), PairFindings> = BTreeMap::new();
    for d in detections.iter().filter(|d| d.client.type_name() == entry_type) {
        let slot = pairs.entry((d.client.clone(), d.library.clone())).or_default();
        slot.0.insert(d.bc_kind);
        match (d.confidence, d.rule) {
            (Confidence::Pessimistic, Some(r)) => {
                slot.1.insert(r);
            }
            _ => slot.2 = true,
        }
    }
    let expected = case.oracle.as_ref().map(|o| (o.client_element.clone(), o.library_element.clone()));
    for (pair, (kinds, rules, certain)) in &pairs {
        if Some(pair) == expected.as_ref() {
            outcome.tp += 1;
        } else {
            outcome.fp += 1;
            outcome.false_positives.push(FalsePositive {
                client_element: pair.0.clone(),
                library_element: pair.1.clone(),
                bc_kinds: kinds.iter().copied().collect(),
                rules: if *certain { Vec::new() } else { rules.iter().copied().collect() },
            });
        }
    }
    if let Some(e) = &expected {
        if !pairs.contains_key(e) {
            outcome.fn_ = 1;
        }
    }
    outcome.verdict = match (outcome.fp > 0, outcome.fn_ > 0) {
        (false, false) if outcome.tp > 0 => Verdict::Correct,
        (false, false) => Verdict::Clean,
        (true, false) => Verdict::FalsePositive,
        (false, true) => Verdict::FalseNegative,
        (true, true) => Verdict::Mixed,
    };
    outcome
}

/// Runs every case in parallel; the report lists cases in manifest order.
pub fn run_benchmark(cases: &[BenchCase], config: &StabilityConfig) -> AccuracyReport {
    let outcomes: Vec<CaseOutcome> = cases.par_iter().map(|c| run_case(c, config)).collect();
    let valid = || outcomes.iter().filter(|o| o.verdict != Verdict::Invalid);
    let tp = valid().map(|o| o.tp).sum();
    let fp = valid().map(|o| o.fp).sum();
    let fn_ = valid().map(|o| o.fn_).sum();
    let gap_fn: usize = valid().filter(|o| o.gap.is_some()).map(|o| o.fn_).sum();
    let mut fp_by_rule = BTreeMap::new();
    let mut unattributed_fp = 0;
    for f in valid().flat_map(|o| &o.false_positives) {
        if f.is_attributed() {
            for r in &f.rules {
                *fp_by_rule.entry(format!("{r:?}")).or_insert(0) += 1;
            }
        } else {
            unattributed_fp += 1;
        }
    }
    let (precision, recall) = score(tp, fp, fn_);
    let (_, recall_excluding_gaps) = score(tp, fp, fn_ - gap_fn);
    AccuracyReport {
        schema_version: REPORT_SCHEMA_VERSION,
        cases: cases.len(),
        invalid: outcomes.iter().filter(|o| o.verdict == Verdict::Invalid).count(),
        oracle_errors: cases.iter().filter(|c| c.oracle.is_some()).count(),
        detections: tp + fp,
        tp,
        fp,
        fn_,
        precision,
        recall,
        recall_excluding_gaps,
        fp_by_rule,
        unattributed_fp,
        outcomes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn score_conventions() {
        assert_eq!(score(0, 0, 0), (1.0, 1.0));
        assert_eq!(score(3, 1, 0), (0.75, 1.0));
        assert_eq!(score(1, 0, 3), (1.0, 0.25));
    }

    #[test]
    fn fixture_suite_round_trips_through_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = crate::fixtures::write_bench_suite(dir.path()).unwrap();
        let cases = load_manifest(&manifest).unwrap();
        assert_eq!(cases.len(), crate::fixtures::bench_fixtures().len());
        assert!(cases.iter().all(|c| c.v1.is_absolute() || c.v1.starts_with(dir.path())));
        let report = run_benchmark(&cases, &StabilityConfig::default());
        assert_eq!(report.invalid, 0);
    }

    #[test]
    fn missing_jar_marks_case_invalid() {
        let case = BenchCase {
            id: "x".into(),
            v1: "/nonexistent/v1.jar".into(),
            v2: "/nonexistent/v2.jar".into(),
            client: "/nonexistent/c.jar".into(),
            entry: "app.Client#run()V".parse().unwrap(),
            oracle: None,
            expected_kind: None,
            gap: None,
        };
        let report = run_benchmark(&[case], &StabilityConfig::default());
        assert_eq!(report.invalid, 1);
        assert_eq!((report.tp, report.fp, report.fn_), (0, 0, 0));
    }
}
