//! Binary breaking changes between two versions of a Java library, the
//! client code they break, and statistics over upgrade corpora.
//!
//! The pipeline for one upgrade is [`build_model`] on each JAR,
//! [`compute_delta`] between the models, [`extract_usage`] on a client and
//! [`compute_detections`] to find the client declarations that break.

pub mod analysis;
pub mod apimodel;
pub mod benchmark;
pub mod classfile;
pub mod corpus;
pub mod delta;
pub mod detect;
pub mod fixtures;
pub mod semver;
pub mod stats;
pub mod usage;

pub use apimodel::{build_model, ApiModel, ElementRef, StabilityConfig, StabilityLabel};
pub use classfile::{open_jar, read_jar, JarContent};
pub use delta::{compute_delta, is_breaking, BcKind, BreakingChange, Delta, Scope};
pub use detect::{classify_impact, compute_detections, Confidence, Detection, ImpactSummary, PessimisticRule};
pub use semver::{classify_upgrade, parse_version, SemverLevel, Version};
pub use usage::{extract_usage, UsageModel, UseKind};
