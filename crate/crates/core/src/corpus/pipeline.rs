use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use chrono::Datelike;
use log::{info, warn};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::derive::{derive_clients, derive_upgrades, ClientRef, Exclusion, ExclusionReason, JarStore, Upgrade};
use super::graph::DependencyGraph;
use super::CorpusError;
use crate::apimodel::{build_model, ApiModel, StabilityConfig};
use crate::delta::{compute_delta, is_breaking, Delta, Scope};
use crate::detect::{classify_impact, compute_detections, Detection};
use crate::semver::SemverLevel;
use crate::stats::cochran_sample;
use crate::usage::extract_usage;

pub const SUMMARY_SCHEMA_VERSION: u32 = 1;

/// `level:confidence:margin`, e.g. `major:0.99:0.01`; `all` samples across
/// levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleSpec {
    pub level: Option<SemverLevel>,
    pub confidence: f64,
    pub margin: f64,
}

impl FromStr for SampleSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [level, conf, margin] = parts.as_slice() else {
            return Err(format!("`{s}` is not level:confidence:margin"));
        };
        let level = if level.eq_ignore_ascii_case("all") { None } else { Some(level.parse()?) };
        let confidence: f64 = conf.parse().map_err(|_| format!("bad confidence `{conf}`"))?;
        let margin: f64 = margin.parse().map_err(|_| format!("bad margin `{margin}`"))?;
        if !(confidence > 0.0 && confidence < 1.0 && margin > 0.0 && margin < 1.0) {
            return Err(format!("confidence and margin must lie in (0, 1) in `{s}`"));
        }
        Ok(SampleSpec { level, confidence, margin })
    }
}

impl fmt::Display for SampleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.level.map_or("all", SemverLevel::as_str), self.confidence, self.margin)
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOptions {
    pub out_dir: PathBuf,
    /// Worker threads; `None` uses the available parallelism.
    pub jobs: Option<usize>,
    /// Empty analyses every client pair.
    pub sample: Vec<SampleSpec>,
    pub seed: u64,
    pub stability: StabilityConfig,
}

impl PipelineOptions {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        PipelineOptions {
            out_dir: out_dir.into(),
            jobs: None,
            sample: Vec::new(),
            seed: 0,
            stability: StabilityConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingRow {
    pub level: String,
    pub confidence: f64,
    pub margin: f64,
    pub population: u64,
    pub sample: u64,
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub schema_version: u32,
    pub artifacts: usize,
    pub candidates: usize,
    pub upgrades: usize,
    pub excluded: usize,
    pub excluded_by_reason: BTreeMap<ExclusionReason, usize>,
    pub upgrades_by_level: BTreeMap<SemverLevel, usize>,
    pub breaking_by_level: BTreeMap<SemverLevel, usize>,
    pub client_pairs: usize,
    pub sampling: Vec<SamplingRow>,
    pub analysed_clients: usize,
    pub broken_clients: usize,
    pub bc_histogram: BTreeMap<String, usize>,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, Default)]
pub struct PipelineReport {
    pub summary: CorpusSummary,
    pub deltas_computed: usize,
    pub deltas_reused: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClientStatus {
    Analysed,
    NotSampled,
    JarUnavailable,
    ProcessingError,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct UpgradeRow {
    pub library: String,
    pub v1: String,
    pub v2: String,
    pub level: SemverLevel,
    pub year: i32,
    pub breaking: bool,
    pub breaking_stable: bool,
    pub bc_count: usize,
    pub bc_stable: usize,
    pub clients: usize,
    pub broken_clients: usize,
    pub delta_file: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ClientRow {
    pub library: String,
    pub v1: String,
    pub v2: String,
    pub level: SemverLevel,
    pub client: String,
    pub scope: String,
    pub sampled: bool,
    pub status: ClientStatus,
    pub broken: bool,
    pub broken_stable: bool,
    pub detections: usize,
    pub certain: usize,
    pub pessimistic: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DetectionRow {
    pub library: String,
    pub v1: String,
    pub v2: String,
    pub client: String,
    pub client_element: String,
    pub library_element: String,
    pub use_kind: String,
    pub bc_kind: String,
    pub confidence: String,
    pub rule: String,
}

struct Processed {
    upgrade: Upgrade,
    delta: Delta,
    old_model: Arc<ApiModel>,
    reused: bool,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io { path: path.display().to_string(), source }
}

fn config_fingerprint(config: &StabilityConfig) -> String {
    format!("keywords={:?};annotations={:?}", config.keywords, config.annotations)
}

fn process_upgrade(
    graph: &DependencyGraph,
    store: &JarStore,
    upgrade: &Upgrade,
    options: &PipelineOptions,
) -> Result<Processed, ExclusionReason> {
    let old = store.load(graph, &upgrade.old()).map_err(|e| e.reason())?;
    let new = store.load(graph, &upgrade.new_coords()).map_err(|e| e.reason())?;
    let old_model = Arc::new(build_model(&old.content, &options.stability));
    let deltas = options.out_dir.join("deltas");
    let json_path = deltas.join(format!("{}.json", upgrade.file_stem()));
    let hash_path = deltas.join(format!("{}.hash", upgrade.file_stem()));
    let mut hasher = Sha256::new();
    hasher.update(format!("delta-schema={}\n", crate::delta::SCHEMA_VERSION));
    hasher.update(format!("{}\n{}\n", old.sha256, new.sha256));
    hasher.update(config_fingerprint(&options.stability));
    let key = hex::encode(hasher.finalize());

    let cached = std::fs::read_to_string(&hash_path).ok().filter(|h| h.trim() == key).and_then(|_| {
        let text = std::fs::read_to_string(&json_path).ok()?;
        Delta::from_json(&text).ok()
    });
    if let Some(delta) = cached {
        return Ok(Processed { upgrade: upgrade.clone(), delta, old_model, reused: true });
    }
    let new_model = build_model(&new.content, &options.stability);
    let delta = compute_delta(&old_model, &new_model);
    let write = || -> std::io::Result<()> {
        std::fs::write(&json_path, delta.to_json() + "\n")?;
        std::fs::write(&hash_path, format!("{key}\n"))
    };
    if let Err(e) = write() {
        warn!("{}: cannot write delta: {e}", upgrade.id());
        return Err(ExclusionReason::ProcessingError);
    }
    Ok(Processed { upgrade: upgrade.clone(), delta, old_model, reused: false })
}

struct ClientOutcome {
    row: ClientRow,
    detections: Vec<Detection>,
}

fn analyse_client(
    graph: &DependencyGraph,
    store: &JarStore,
    p: &Processed,
    client: &ClientRef,
    sampled: bool,
) -> ClientOutcome {
    let mut row = ClientRow {
        library: p.upgrade.library.to_string(),
        v1: p.upgrade.v1.raw.clone(),
        v2: p.upgrade.v2.raw.clone(),
        level: p.upgrade.level,
        client: client.client.to_string(),
        scope: client.scope.to_string(),
        sampled,
        status: ClientStatus::NotSampled,
        broken: false,
        broken_stable: false,
        detections: 0,
        certain: 0,
        pessimistic: 0,
    };
    if !sampled {
        return ClientOutcome { row, detections: Vec::new() };
    }
    let jar = match store.load(graph, &client.client) {
        Ok(jar) => jar,
        Err(e) => {
            row.status = match e.reason() {
                ExclusionReason::JarUnavailable => ClientStatus::JarUnavailable,
                _ => ClientStatus::ProcessingError,
            };
            return ClientOutcome { row, detections: Vec::new() };
        }
    };
    let usage = extract_usage(&jar.content, &p.old_model);
    let detections = match compute_detections(&p.delta, &usage) {
        Ok(d) => d,
        Err(e) => {
            warn!("{} with {}: {e}", p.upgrade.id(), client.client);
            row.status = ClientStatus::ProcessingError;
            return ClientOutcome { row, detections: Vec::new() };
        }
    };
    let impact = classify_impact(&p.delta, &usage, &detections);
    row.status = ClientStatus::Analysed;
    row.broken = impact.broken;
    row.broken_stable = impact.broken_stable;
    row.detections = impact.detections;
    row.certain = impact.certain;
    row.pessimistic = impact.pessimistic;
    ClientOutcome { row, detections }
}

/// Picks the analysed (upgrade, client) pairs. Each spec draws a seeded
/// simple random sample of Cochran size from its level's pairs.
fn select_sample(
    pairs: &[(usize, ClientRef)],
    levels: &[SemverLevel],
    specs: &[SampleSpec],
    seed: u64,
) -> Result<(BTreeSet<usize>, Vec<SamplingRow>), CorpusError> {
    if specs.is_empty() {
        return Ok(((0..pairs.len()).collect(), Vec::new()));
    }
    let mut chosen = BTreeSet::new();
    let mut rows = Vec::new();
    for (k, spec) in specs.iter().enumerate() {
        let population: Vec<usize> =
            (0..pairs.len()).filter(|&i| spec.level.is_none_or(|l| levels[pairs[i].0] == l)).collect();
        let size = if population.is_empty() {
            0
        } else {
            cochran_sample(population.len() as u64, spec.confidence, spec.margin, 0.5)
                .map_err(|e| CorpusError::Options(e.to_string()))?
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
        for i in sample(&mut rng, population.len(), size as usize) {
            chosen.insert(population[i]);
        }
        rows.push(SamplingRow {
            level: spec.level.map_or("all", SemverLevel::as_str).to_string(),
            confidence: spec.confidence,
            margin: spec.margin,
            population: population.len() as u64,
            sample: size,
        });
    }
    Ok((chosen, rows))
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T], header: &[&str]) -> Result<(), CorpusError> {
    let mut w =
        csv::WriterBuilder::new().has_headers(false).from_path(path).map_err(|e| CorpusError::Csv(e.to_string()))?;
    w.write_record(header).map_err(|e| CorpusError::Csv(e.to_string()))?;
    for r in rows {
        w.serialize(r).map_err(|e| CorpusError::Csv(e.to_string()))?;
    }
    w.flush().map_err(io_err(path))
}

pub const UPGRADES_HEADER: [&str; 12] = [
    "library",
    "v1",
    "v2",
    "level",
    "year",
    "breaking",
    "breaking_stable",
    "bc_count",
    "bc_stable",
    "clients",
    "broken_clients",
    "delta_file",
];
pub const EXCLUSIONS_HEADER: [&str; 4] = ["library", "v1", "v2", "reason"];
pub const CLIENTS_HEADER: [&str; 13] = [
    "library",
    "v1",
    "v2",
    "level",
    "client",
    "scope",
    "sampled",
    "status",
    "broken",
    "broken_stable",
    "detections",
    "certain",
    "pessimistic",
];
pub const DETECTIONS_HEADER: [&str; 10] =
    ["library", "v1", "v2", "client", "client_element", "library_element", "use_kind", "bc_kind", "confidence", "rule"];

/// Derives upgrades and clients, computes deltas and detections, and writes
/// `upgrades.csv`, `exclusions.csv`, `clients.csv`, `detections.csv`,
/// `deltas/*.json` and `summary.json` into `options.out_dir`. Deltas whose
/// `.hash` file matches the inputs are read back instead of recomputed.
pub fn run_pipeline(
    graph: &DependencyGraph,
    store: &JarStore,
    options: &PipelineOptions,
) -> Result<PipelineReport, CorpusError> {
    let out = &options.out_dir;
    std::fs::create_dir_all(out.join("deltas")).map_err(io_err(out))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs.unwrap_or(0))
        .build()
        .map_err(|e| CorpusError::Options(e.to_string()))?;

    let mut derivation = derive_upgrades(graph, store);
    info!("{} candidates, {} upgrades", derivation.candidates(), derivation.upgrades.len());

    let results: Vec<Result<Processed, ExclusionReason>> =
        pool.install(|| derivation.upgrades.par_iter().map(|u| process_upgrade(graph, store, u, options)).collect());
    let mut processed = Vec::new();
    for (u, r) in derivation.upgrades.iter().zip(results) {
        match r {
            Ok(p) => processed.push(p),
            Err(reason) => derivation.exclusions.push(Exclusion {
                library: u.library.to_string(),
                v1: u.v1.raw.clone(),
                v2: u.v2.raw.clone(),
                reason,
            }),
        }
    }
    derivation.exclusions.sort();

    let pairs: Vec<(usize, ClientRef)> = processed
        .iter()
        .enumerate()
        .flat_map(|(i, p)| derive_clients(&p.upgrade, graph).into_iter().map(move |c| (i, c)))
        .collect();
    let levels: Vec<SemverLevel> = processed.iter().map(|p| p.upgrade.level).collect();
    let (chosen, sampling) = select_sample(&pairs, &levels, &options.sample, options.seed)?;
    let outcomes: Vec<ClientOutcome> = pool.install(|| {
        pairs
            .par_iter()
            .enumerate()
            .map(|(k, (i, c))| analyse_client(graph, store, &processed[*i], c, chosen.contains(&k)))
            .collect()
    });

    let mut summary = CorpusSummary {
        schema_version: SUMMARY_SCHEMA_VERSION,
        artifacts: graph.len(),
        candidates: derivation.candidates(),
        upgrades: processed.len(),
        excluded: derivation.exclusions.len(),
        excluded_by_reason: derivation.excluded_by_reason(),
        client_pairs: pairs.len(),
        sampling,
        diagnostics: graph.diagnostics.clone(),
        ..Default::default()
    };

    let mut upgrade_rows = Vec::new();
    for (i, p) in processed.iter().enumerate() {
        let mine = pairs.iter().zip(&outcomes).filter(|((j, _), _)| *j == i);
        let (clients, broken) = mine.fold((0, 0), |(c, b), (_, o)| (c + 1, b + usize::from(o.row.broken)));
        let breaking = is_breaking(&p.delta, Scope::All);
        *summary.upgrades_by_level.entry(p.upgrade.level).or_default() += 1;
        *summary.breaking_by_level.entry(p.upgrade.level).or_default() += usize::from(breaking);
        for change in &p.delta.changes {
            *summary.bc_histogram.entry(change.kind.name().to_string()).or_default() += 1;
        }
        let year = graph.get(&p.upgrade.new_coords()).map_or(0, |a| a.release_date.year());
        upgrade_rows.push(UpgradeRow {
            library: p.upgrade.library.to_string(),
            v1: p.upgrade.v1.raw.clone(),
            v2: p.upgrade.v2.raw.clone(),
            level: p.upgrade.level,
            year,
            breaking,
            breaking_stable: is_breaking(&p.delta, Scope::StableOnly),
            bc_count: p.delta.changes.len(),
            bc_stable: p.delta.stable_changes().count(),
            clients,
            broken_clients: broken,
            delta_file: format!("deltas/{}.json", p.upgrade.file_stem()),
        });
    }

    let mut client_rows = Vec::new();
    let mut detection_rows = Vec::new();
    for outcome in outcomes {
        let r = &outcome.row;
        summary.analysed_clients += usize::from(r.status == ClientStatus::Analysed);
        summary.broken_clients += usize::from(r.broken);
        for d in &outcome.detections {
            detection_rows.push(DetectionRow {
                library: r.library.clone(),
                v1: r.v1.clone(),
                v2: r.v2.clone(),
                client: r.client.clone(),
                client_element: d.client.to_string(),
                library_element: d.library.to_string(),
                use_kind: d.use_kind.as_str().to_string(),
                bc_kind: d.bc_kind.name().to_string(),
                confidence: serde_json::to_value(d.confidence)
                    .ok()
                    .and_then(|v| v.as_str().map(String::from))
                    .unwrap_or_default(),
                rule: d
                    .rule
                    .and_then(|r| serde_json::to_value(r).ok())
                    .and_then(|v| v.as_str().map(String::from))
                    .unwrap_or_default(),
            });
        }
        client_rows.push(outcome.row);
    }

    write_csv(&out.join("upgrades.csv"), &upgrade_rows, &UPGRADES_HEADER)?;
    write_csv(&out.join("exclusions.csv"), &derivation.exclusions, &EXCLUSIONS_HEADER)?;
    write_csv(&out.join("clients.csv"), &client_rows, &CLIENTS_HEADER)?;
    write_csv(&out.join("detections.csv"), &detection_rows, &DETECTIONS_HEADER)?;
    let summary_path = out.join("summary.json");
    let text = serde_json::to_string_pretty(&summary).map_err(|e| CorpusError::Csv(e.to_string()))? + "\n";
    std::fs::write(&summary_path, text).map_err(io_err(&summary_path))?;

    let reused = processed.iter().filter(|p| p.reused).count();
    Ok(PipelineReport { summary, deltas_computed: processed.len() - reused, deltas_reused: reused })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_spec_parsing() {
        let s: SampleSpec = "major:0.99:0.01".parse().unwrap();
        assert_eq!(s.level, Some(SemverLevel::Major));
        assert_eq!(s.to_string(), "major:0.99:0.01");
        assert_eq!("all:0.95:0.05".parse::<SampleSpec>().unwrap().level, None);
        assert!("major:1.5:0.01".parse::<SampleSpec>().is_err());
        assert!("major:0.9".parse::<SampleSpec>().is_err());
    }
}
