//! Upgrade and client datasets derived from a dependency graph, and the
//! batch pipeline that computes deltas and detections over them.

mod derive;
pub mod graph;
mod pipeline;

pub use derive::{
    derive_clients, derive_upgrades, has_external_client, ClientRef, Derivation, Exclusion, ExclusionReason, JarStore,
    StoreError, StoredJar, Upgrade,
};
pub use graph::{
    load_graph, parse_graph, write_graph, ArtifactRecord, Coordinates, DepScope, DependencyGraph, EdgeKind, GraphEdge,
    LibraryId,
};
pub use pipeline::{
    run_pipeline, ClientRow, ClientStatus, CorpusSummary, DetectionRow, PipelineOptions, PipelineReport, SampleSpec,
    SamplingRow, UpgradeRow, CLIENTS_HEADER, DETECTIONS_HEADER, EXCLUSIONS_HEADER, SUMMARY_SCHEMA_VERSION,
    UPGRADES_HEADER,
};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("{file}.csv line {line}: {message}")]
    Schema { file: String, line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(String),
    #[error("invalid options: {0}")]
    Options(String),
}

impl CorpusError {
    pub(crate) fn schema(file: &str, line: usize, message: impl Into<String>) -> Self {
        CorpusError::Schema { file: file.to_string(), line, message: message.into() }
    }
}
