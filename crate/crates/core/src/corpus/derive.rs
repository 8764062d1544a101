use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::graph::{Coordinates, DepScope, DependencyGraph, LibraryId};
use crate::classfile::{read_jar, JarContent, JAVA_8_MAJOR};
use crate::semver::{classify_upgrade, parse_version, SemverLevel, Verdict, Version};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionReason {
    /// `v1` carries a qualifier or is not of the form `X.Y[.Z]`.
    NonCompliantVersion,
    DateLikeVersion,
    /// No compliant version follows `v1` along NEXT edges.
    NoCompliantSuccessor,
    /// `v2` does not increase the version number.
    NotAnUpgrade,
    NoExternalClient,
    NotJarPackaging,
    ReleaseDateInversion,
    JarUnavailable,
    NonJavaLanguage,
    #[serde(rename = "java_version_above_8")]
    JavaVersionAbove8,
    /// A JAR could be read but processing it failed.
    ProcessingError,
}

impl ExclusionReason {
    pub const ALL: [ExclusionReason; 11] = [
        ExclusionReason::NonCompliantVersion,
        ExclusionReason::DateLikeVersion,
        ExclusionReason::NoCompliantSuccessor,
        ExclusionReason::NotAnUpgrade,
        ExclusionReason::NoExternalClient,
        ExclusionReason::NotJarPackaging,
        ExclusionReason::ReleaseDateInversion,
        ExclusionReason::JarUnavailable,
        ExclusionReason::NonJavaLanguage,
        ExclusionReason::JavaVersionAbove8,
        ExclusionReason::ProcessingError,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExclusionReason::NonCompliantVersion => "non_compliant_version",
            ExclusionReason::DateLikeVersion => "date_like_version",
            ExclusionReason::NoCompliantSuccessor => "no_compliant_successor",
            ExclusionReason::NotAnUpgrade => "not_an_upgrade",
            ExclusionReason::NoExternalClient => "no_external_client",
            ExclusionReason::NotJarPackaging => "not_jar_packaging",
            ExclusionReason::ReleaseDateInversion => "release_date_inversion",
            ExclusionReason::JarUnavailable => "jar_unavailable",
            ExclusionReason::NonJavaLanguage => "non_java_language",
            ExclusionReason::JavaVersionAbove8 => "java_version_above_8",
            ExclusionReason::ProcessingError => "processing_error",
        }
    }
}

impl fmt::Display for ExclusionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An emitted upgrade pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Upgrade {
    pub library: LibraryId,
    pub v1: Version,
    pub v2: Version,
    pub level: SemverLevel,
}

impl Upgrade {
    pub fn old(&self) -> Coordinates {
        Coordinates::new(&self.library.group, &self.library.artifact, &self.v1.raw)
    }

    pub fn new_coords(&self) -> Coordinates {
        Coordinates::new(&self.library.group, &self.library.artifact, &self.v2.raw)
    }

    /// `group:artifact:v1..v2`.
    pub fn id(&self) -> String {
        format!("{}:{}..{}", self.library, self.v1.raw, self.v2.raw)
    }

    /// File-system friendly form of [`Upgrade::id`].
    pub fn file_stem(&self) -> String {
        self.id()
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' || c == '_' { c } else { '_' })
            .collect()
    }
}

/// A discarded candidate pair.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Exclusion {
    pub library: String,
    pub v1: String,
    pub v2: String,
    pub reason: ExclusionReason,
}

#[derive(Debug, Clone, Default)]
pub struct Derivation {
    pub upgrades: Vec<Upgrade>,
    pub exclusions: Vec<Exclusion>,
}

impl Derivation {
    pub fn candidates(&self) -> usize {
        self.upgrades.len() + self.exclusions.len()
    }

    pub fn excluded_by_reason(&self) -> BTreeMap<ExclusionReason, usize> {
        let mut out = BTreeMap::new();
        for e in &self.exclusions {
            *out.entry(e.reason).or_default() += 1;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StoreError {
    #[error("no JAR recorded for {0}")]
    Missing(Coordinates),
    #[error("{0}: {1}")]
    Unreadable(PathBuf, String),
    #[error("{0}: {1}")]
    Corrupt(PathBuf, String),
}

impl StoreError {
    pub fn reason(&self) -> ExclusionReason {
        match self {
            StoreError::Missing(_) | StoreError::Unreadable(..) => ExclusionReason::JarUnavailable,
            StoreError::Corrupt(..) => ExclusionReason::ProcessingError,
        }
    }
}

/// Parsed JAR together with the SHA-256 of its bytes.
#[derive(Debug)]
pub struct StoredJar {
    pub content: JarContent,
    pub sha256: String,
}

type Cached = Result<Arc<StoredJar>, StoreError>;

/// Resolves `jar_path` entries against a root directory and caches parsed
/// archives. Relative paths are taken from the root, absolute ones as is.
#[derive(Debug)]
pub struct JarStore {
    root: PathBuf,
    cache: Mutex<HashMap<Coordinates, Cached>>,
}

impl JarStore {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        JarStore { root: root.into(), cache: Mutex::new(HashMap::new()) }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn load(&self, graph: &DependencyGraph, coords: &Coordinates) -> Cached {
        if let Some(hit) = self.cache.lock().expect("store lock").get(coords) {
            return hit.clone();
        }
        let loaded = self.read(graph, coords);
        self.cache.lock().expect("store lock").entry(coords.clone()).or_insert(loaded).clone()
    }

    fn read(&self, graph: &DependencyGraph, coords: &Coordinates) -> Cached {
        let rel =
            graph.get(coords).and_then(|a| a.jar_path.clone()).ok_or_else(|| StoreError::Missing(coords.clone()))?;
        let path = self.root.join(rel);
        let bytes = std::fs::read(&path).map_err(|e| StoreError::Unreadable(path.clone(), e.to_string()))?;
        let sha256 = hex::encode(<sha2::Sha256 as sha2::Digest>::digest(&bytes));
        let content = read_jar(&bytes, &coords.to_string()).map_err(|e| StoreError::Corrupt(path, e.to_string()))?;
        Ok(Arc::new(StoredJar { content, sha256 }))
    }
}

fn version_reason(v: &Version) -> Option<ExclusionReason> {
    match v.verdict {
        Verdict::Compliant => None,
        Verdict::DateLike => Some(ExclusionReason::DateLikeVersion),
        _ => Some(ExclusionReason::NonCompliantVersion),
    }
}

fn parsed(graph: &DependencyGraph, i: usize) -> Option<Version> {
    parse_version(&graph.artifact(i).coords.version).ok()
}

/// First compliant versions reached from `i` along NEXT edges, walking
/// through non-compliant intermediates only.
fn compliant_successors(graph: &DependencyGraph, i: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut seen = vec![false; graph.len()];
    let mut stack: Vec<usize> = graph.successors(i).iter().rev().copied().collect();
    while let Some(j) = stack.pop() {
        if std::mem::replace(&mut seen[j], true) {
            continue;
        }
        if parsed(graph, j).is_some_and(|v| v.is_compliant()) {
            out.push(j);
        } else {
            stack.extend(graph.successors(j).iter().rev());
        }
    }
    out.sort_unstable();
    out
}

pub fn has_external_client(graph: &DependencyGraph, i: usize) -> bool {
    let group = &graph.artifact(i).coords.group;
    graph.dependents(i).iter().any(|&(c, scope)| scope.is_linked() && &graph.artifact(c).coords.group != group)
}

fn jar_reason(graph: &DependencyGraph, store: &JarStore, i: usize) -> Option<ExclusionReason> {
    match store.load(graph, &graph.artifact(i).coords) {
        Err(e) => Some(e.reason()),
        Ok(jar) if !jar.content.is_java_only() => Some(ExclusionReason::NonJavaLanguage),
        Ok(jar) if jar.content.max_major_version().is_some_and(|m| m > JAVA_8_MAJOR) => {
            Some(ExclusionReason::JavaVersionAbove8)
        }
        Ok(_) => None,
    }
}

/// Candidate pairs and their fate. Every artifact with outgoing NEXT edges
/// yields at least one candidate: a non-compliant `v1` one per raw
/// successor, a compliant `v1` one per nearest compliant successor (or a
/// single `no_compliant_successor` exclusion). Filters apply in a fixed
/// order and the first failing one is recorded.
pub fn derive_upgrades(graph: &DependencyGraph, store: &JarStore) -> Derivation {
    let mut d = Derivation::default();
    for i in 0..graph.len() {
        let succ = graph.successors(i);
        if succ.is_empty() {
            continue;
        }
        let a1 = graph.artifact(i);
        let lib = a1.coords.library();
        let exclude = |d: &mut Derivation, j: usize, reason| {
            d.exclusions.push(Exclusion {
                library: lib.to_string(),
                v1: a1.coords.version.clone(),
                v2: graph.artifact(j).coords.version.clone(),
                reason,
            })
        };
        let v1 = match parse_version(&a1.coords.version) {
            Ok(v) => v,
            Err(_) => {
                for &j in succ {
                    exclude(&mut d, j, ExclusionReason::NonCompliantVersion);
                }
                continue;
            }
        };
        if let Some(reason) = version_reason(&v1) {
            for &j in succ {
                exclude(&mut d, j, reason);
            }
            continue;
        }
        let targets = compliant_successors(graph, i);
        if targets.is_empty() {
            exclude(&mut d, succ[0], ExclusionReason::NoCompliantSuccessor);
            continue;
        }
        for j in targets {
            let a2 = graph.artifact(j);
            let v2 = parsed(graph, j).expect("compliant successor parses");
            let level = match classify_upgrade(&v1, &v2) {
                Ok(level) => level,
                Err(_) => {
                    exclude(&mut d, j, ExclusionReason::NotAnUpgrade);
                    continue;
                }
            };
            let reason = if !has_external_client(graph, i) {
                Some(ExclusionReason::NoExternalClient)
            } else if !a1.packaging.eq_ignore_ascii_case("jar") || !a2.packaging.eq_ignore_ascii_case("jar") {
                Some(ExclusionReason::NotJarPackaging)
            } else if a1.release_date > a2.release_date {
                Some(ExclusionReason::ReleaseDateInversion)
            } else {
                jar_reason(graph, store, i).or_else(|| jar_reason(graph, store, j))
            };
            match reason {
                Some(r) => exclude(&mut d, j, r),
                None => d.upgrades.push(Upgrade { library: lib.clone(), v1: v1.clone(), v2, level }),
            }
        }
    }
    d.upgrades.sort_by_key(Upgrade::id);
    d.exclusions.sort();
    d
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ClientRef {
    pub client: Coordinates,
    pub depended_version: Coordinates,
    pub scope: DepScope,
}

/// External clients of `v1` with a compile or test dependency, keeping the
/// latest version of each client artifact.
pub fn derive_clients(upgrade: &Upgrade, graph: &DependencyGraph) -> Vec<ClientRef> {
    let old = upgrade.old();
    let Some(lib) = graph.index_of(&old) else { return Vec::new() };
    let mut best: BTreeMap<LibraryId, (usize, DepScope)> = BTreeMap::new();
    for &(c, scope) in graph.dependents(lib) {
        let coords = &graph.artifact(c).coords;
        if !scope.is_linked() || coords.group == old.group {
            continue;
        }
        match best.get_mut(&coords.library()) {
            None => {
                best.insert(coords.library(), (c, scope));
            }
            Some(entry) => match later(graph, c, entry.0) {
                Ordering::Greater => *entry = (c, scope),
                Ordering::Equal if scope < entry.1 => entry.1 = scope,
                _ => {}
            },
        }
    }
    best.into_values()
        .map(|(c, scope)| ClientRef { client: graph.artifact(c).coords.clone(), depended_version: old.clone(), scope })
        .collect()
}

/// Order of two versions of one artifact: NEXT reachability first, then
/// release date, then the version string.
fn later(graph: &DependencyGraph, a: usize, b: usize) -> Ordering {
    if a == b {
        return Ordering::Equal;
    }
    if graph.next_reachable(b, a) {
        return Ordering::Greater;
    }
    if graph.next_reachable(a, b) {
        return Ordering::Less;
    }
    let (ra, rb) = (graph.artifact(a), graph.artifact(b));
    ra.release_date.cmp(&rb.release_date).then_with(|| ra.coords.version.cmp(&rb.coords.version))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::graph::parse_graph;

    fn graph(artifacts: &[&str], edges: &[&str]) -> DependencyGraph {
        let a = format!("group,artifact,version,release_date,packaging,jar_path\n{}\n", artifacts.join("\n"));
        let e = format!("kind,scope,from,to\n{}\n", edges.join("\n"));
        parse_graph(a.as_bytes(), e.as_bytes()).unwrap()
    }

    #[test]
    fn only_latest_client_version_kept() {
        let g = graph(
            &[
                "l,lib,1.0,2020-01-01,jar,",
                "l,lib,1.1,2020-02-01,jar,",
                "c,app,1,2020-01-05,jar,",
                "c,app,2,2020-01-06,jar,",
                "c,app,3,2020-01-04,jar,",
                "d,tool,1,2020-01-04,jar,",
                "l,internal,1,2020-01-04,jar,",
            ],
            &[
                "NEXT,,l:lib:1.0,l:lib:1.1",
                "NEXT,,c:app:1,c:app:2",
                "NEXT,,c:app:2,c:app:3",
                "DEPENDS,compile,c:app:1,l:lib:1.0",
                "DEPENDS,test,c:app:2,l:lib:1.0",
                "DEPENDS,compile,c:app:3,l:lib:1.0",
                "DEPENDS,runtime,d:tool:1,l:lib:1.0",
                "DEPENDS,compile,l:internal:1,l:lib:1.0",
            ],
        );
        let up = Upgrade {
            library: LibraryId { group: "l".into(), artifact: "lib".into() },
            v1: parse_version("1.0").unwrap(),
            v2: parse_version("1.1").unwrap(),
            level: SemverLevel::Minor,
        };
        let clients = derive_clients(&up, &g);
        assert_eq!(clients.len(), 1);
        // c:app:3 is released earliest but is last along NEXT
        assert_eq!(clients[0].client.version, "3");
    }

    #[test]
    fn no_dependents() {
        let g = graph(&["l,lib,1.0,2020-01-01,jar,", "l,lib,1.1,2020-02-01,jar,"], &["NEXT,,l:lib:1.0,l:lib:1.1"]);
        let store = JarStore::new(".");
        let d = derive_upgrades(&g, &store);
        assert!(d.upgrades.is_empty());
        assert_eq!(d.exclusions[0].reason, ExclusionReason::NoExternalClient);
        let up = Upgrade {
            library: LibraryId { group: "l".into(), artifact: "lib".into() },
            v1: parse_version("1.0").unwrap(),
            v2: parse_version("1.1").unwrap(),
            level: SemverLevel::Minor,
        };
        assert!(derive_clients(&up, &g).is_empty());
    }

    #[test]
    fn skips_qualified_intermediates() {
        let g = graph(
            &[
                "l,lib,1.0,2020-01-01,jar,",
                "l,lib,1.1-rc1,2020-01-15,jar,",
                "l,lib,1.1,2020-02-01,pom,",
                "x,app,1,2020-01-01,jar,",
            ],
            &["NEXT,,l:lib:1.0,l:lib:1.1-rc1", "NEXT,,l:lib:1.1-rc1,l:lib:1.1", "DEPENDS,compile,x:app:1,l:lib:1.0"],
        );
        let d = derive_upgrades(&g, &JarStore::new("."));
        let got: Vec<_> = d.exclusions.iter().map(|e| (e.v1.as_str(), e.v2.as_str(), e.reason)).collect();
        assert_eq!(
            got,
            vec![
                ("1.0", "1.1", ExclusionReason::NotJarPackaging),
                ("1.1-rc1", "1.1", ExclusionReason::NonCompliantVersion)
            ]
        );
    }
}
