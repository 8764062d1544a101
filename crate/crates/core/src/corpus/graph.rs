//! Flat-file dependency graph: `artifacts.csv` and `edges.csv`.
//!
//! ```text
//! group,artifact,version,release_date,packaging,jar_path
//! javax.servlet,javax.servlet-api,3.0.1,2011-07-12,jar,servlet/3.0.1.jar
//!
//! kind,scope,from,to
//! NEXT,,javax.servlet:javax.servlet-api:3.0.1,javax.servlet:javax.servlet-api:3.1-b01
//! DEPENDS,compile,com.example:webapp:1.0,javax.servlet:javax.servlet-api:3.0.1
//! ```
//!
//! Lines starting with `#` are comments.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{DateTime, NaiveDate, NaiveDateTime, Utc};
use serde::{Deserialize, Serialize};

use super::CorpusError;

pub const ARTIFACTS_HEADER: [&str; 6] = ["group", "artifact", "version", "release_date", "packaging", "jar_path"];
pub const EDGES_HEADER: [&str; 4] = ["kind", "scope", "from", "to"];
/// First line written by [`write_graph`].
pub const FORMAT_LINE: &str = "# breakscope graph format 1";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LibraryId {
    pub group: String,
    pub artifact: String,
}

impl fmt::Display for LibraryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.group, self.artifact)
    }
}

/// `group:artifact:version`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coordinates {
    pub group: String,
    pub artifact: String,
    pub version: String,
}

impl Coordinates {
    pub fn new(group: &str, artifact: &str, version: &str) -> Self {
        Coordinates { group: group.into(), artifact: artifact.into(), version: version.into() }
    }

    pub fn library(&self) -> LibraryId {
        LibraryId { group: self.group.clone(), artifact: self.artifact.clone() }
    }
}

impl fmt::Display for Coordinates {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.group, self.artifact, self.version)
    }
}

impl FromStr for Coordinates {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [g, a, v] if !g.is_empty() && !a.is_empty() && !v.is_empty() => Ok(Coordinates::new(g, a, v)),
            _ => Err(format!("`{s}` is not group:artifact:version")),
        }
    }
}

impl Serialize for Coordinates {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Coordinates {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArtifactRecord {
    pub coords: Coordinates,
    pub release_date: DateTime<Utc>,
    pub packaging: String,
    pub jar_path: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DepScope {
    Compile,
    Test,
    Provided,
    Runtime,
    System,
}

impl DepScope {
    pub fn as_str(self) -> &'static str {
        match self {
            DepScope::Compile => "compile",
            DepScope::Test => "test",
            DepScope::Provided => "provided",
            DepScope::Runtime => "runtime",
            DepScope::System => "system",
        }
    }

    /// Only these scopes put the library on the client's compile and link
    /// classpath.
    pub fn is_linked(self) -> bool {
        matches!(self, DepScope::Compile | DepScope::Test)
    }
}

impl fmt::Display for DepScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DepScope {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "compile" => DepScope::Compile,
            "test" => DepScope::Test,
            "provided" => DepScope::Provided,
            "runtime" => DepScope::Runtime,
            "system" => DepScope::System,
            _ => return Err(format!("unknown scope `{s}`")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    Depends(DepScope),
    Next,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphEdge {
    pub kind: EdgeKind,
    pub from: Coordinates,
    pub to: Coordinates,
}

#[derive(Debug, Clone, Default)]
pub struct DependencyGraph {
    pub artifacts: Vec<ArtifactRecord>,
    pub edges: Vec<GraphEdge>,
    index: HashMap<Coordinates, usize>,
    next: BTreeMap<usize, Vec<usize>>,
    /// Incoming DEPENDS edges: library index → (client index, scope).
    dependents: BTreeMap<usize, Vec<(usize, DepScope)>>,
    /// Non-fatal problems such as edges to unknown artifacts.
    pub diagnostics: Vec<String>,
}

impl DependencyGraph {
    pub fn new(artifacts: Vec<ArtifactRecord>, edges: Vec<GraphEdge>) -> Result<Self, CorpusError> {
        let mut g = DependencyGraph::default();
        for (i, a) in artifacts.iter().enumerate() {
            if g.index.insert(a.coords.clone(), i).is_some() {
                return Err(CorpusError::schema("artifacts", i + 2, format!("duplicate coordinates {}", a.coords)));
            }
        }
        g.artifacts = artifacts;
        for e in edges {
            let (Some(&from), Some(&to)) = (g.index.get(&e.from), g.index.get(&e.to)) else {
                g.diagnostics.push(format!("dangling edge {} -> {}", e.from, e.to));
                continue;
            };
            match e.kind {
                EdgeKind::Next => {
                    if e.from.library() != e.to.library() {
                        g.diagnostics.push(format!("NEXT edge across libraries {} -> {} ignored", e.from, e.to));
                        continue;
                    }
                    g.next.entry(from).or_default().push(to);
                }
                EdgeKind::Depends(scope) => g.dependents.entry(to).or_default().push((from, scope)),
            }
            g.edges.push(e);
        }
        for succ in g.next.values_mut() {
            succ.sort_unstable();
            succ.dedup();
        }
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.artifacts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.artifacts.is_empty()
    }

    pub fn index_of(&self, coords: &Coordinates) -> Option<usize> {
        self.index.get(coords).copied()
    }

    pub fn artifact(&self, i: usize) -> &ArtifactRecord {
        &self.artifacts[i]
    }

    pub fn get(&self, coords: &Coordinates) -> Option<&ArtifactRecord> {
        self.index_of(coords).map(|i| &self.artifacts[i])
    }

    pub fn successors(&self, i: usize) -> &[usize] {
        self.next.get(&i).map_or(&[], Vec::as_slice)
    }

    pub fn dependents(&self, i: usize) -> &[(usize, DepScope)] {
        self.dependents.get(&i).map_or(&[], Vec::as_slice)
    }

    pub fn count_edges(&self, next: bool) -> usize {
        self.edges.iter().filter(|e| matches!(e.kind, EdgeKind::Next) == next).count()
    }

    /// Whether `to` is reachable from `from` through one or more NEXT edges.
    pub fn next_reachable(&self, from: usize, to: usize) -> bool {
        let mut seen = HashSet::new();
        let mut stack: Vec<usize> = self.successors(from).to_vec();
        while let Some(i) = stack.pop() {
            if i == to {
                return true;
            }
            if seen.insert(i) {
                stack.extend_from_slice(self.successors(i));
            }
        }
        false
    }
}

pub fn parse_release_date(s: &str) -> Result<DateTime<Utc>, String> {
    let s = s.trim();
    if let Ok(d) = DateTime::parse_from_rfc3339(s) {
        return Ok(d.with_timezone(&Utc));
    }
    if let Ok(d) = NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S") {
        return Ok(d.and_utc());
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .map(|d| d.and_hms_opt(0, 0, 0).expect("midnight exists").and_utc())
        .map_err(|_| format!("invalid ISO-8601 date `{s}`"))
}

fn csv_reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).flexible(false).from_reader(input)
}

fn check_header<R: Read>(rdr: &mut csv::Reader<R>, file: &str, expected: &[&str]) -> Result<(), CorpusError> {
    let header = rdr.headers().map_err(|e| CorpusError::schema(file, 1, e.to_string()))?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(CorpusError::schema(file, 1, format!("expected header `{}`", expected.join(","))));
    }
    Ok(())
}

fn line_of(rec: &csv::StringRecord) -> usize {
    rec.position().map_or(0, |p| p.line() as usize)
}

pub fn parse_artifacts<R: Read>(input: R) -> Result<Vec<ArtifactRecord>, CorpusError> {
    const FILE: &str = "artifacts";
    let mut rdr = csv_reader(input);
    check_header(&mut rdr, FILE, &ARTIFACTS_HEADER)?;
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for rec in rdr.records() {
        let rec =
            rec.map_err(|e| CorpusError::schema(FILE, e.position().map_or(0, |p| p.line() as usize), e.to_string()))?;
        let line = line_of(&rec);
        let field = |i: usize| rec.get(i).unwrap_or_default();
        if !seen.insert((field(0).to_string(), field(1).to_string(), field(2).to_string())) {
            return Err(CorpusError::schema(
                FILE,
                line,
                format!("duplicate coordinates {}:{}:{}", field(0), field(1), field(2)),
            ));
        }
        if field(0).is_empty() || field(1).is_empty() || field(2).is_empty() {
            return Err(CorpusError::schema(FILE, line, "group, artifact and version are required"));
        }
        let release_date = parse_release_date(field(3)).map_err(|m| CorpusError::schema(FILE, line, m))?;
        out.push(ArtifactRecord {
            coords: Coordinates::new(field(0), field(1), field(2)),
            release_date,
            packaging: field(4).to_string(),
            jar_path: (!field(5).is_empty()).then(|| PathBuf::from(field(5))),
        });
    }
    Ok(out)
}

pub fn parse_edges<R: Read>(input: R) -> Result<Vec<GraphEdge>, CorpusError> {
    const FILE: &str = "edges";
    let mut rdr = csv_reader(input);
    check_header(&mut rdr, FILE, &EDGES_HEADER)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec =
            rec.map_err(|e| CorpusError::schema(FILE, e.position().map_or(0, |p| p.line() as usize), e.to_string()))?;
        let line = line_of(&rec);
        let field = |i: usize| rec.get(i).unwrap_or_default();
        let kind = match field(0).to_ascii_uppercase().as_str() {
            "NEXT" => EdgeKind::Next,
            "DEPENDS" => EdgeKind::Depends(field(1).parse().map_err(|m| CorpusError::schema(FILE, line, m))?),
            other => return Err(CorpusError::schema(FILE, line, format!("unknown edge kind `{other}`"))),
        };
        let from = field(2).parse().map_err(|m| CorpusError::schema(FILE, line, m))?;
        let to = field(3).parse().map_err(|m| CorpusError::schema(FILE, line, m))?;
        out.push(GraphEdge { kind, from, to });
    }
    Ok(out)
}

pub fn parse_graph<A: Read, E: Read>(artifacts: A, edges: E) -> Result<DependencyGraph, CorpusError> {
    DependencyGraph::new(parse_artifacts(artifacts)?, parse_edges(edges)?)
}

/// Loads `artifacts.csv` and `edges.csv` from `dir`.
pub fn load_graph(dir: &Path) -> Result<DependencyGraph, CorpusError> {
    let open = |name: &str| {
        let path = dir.join(name);
        std::fs::File::open(&path).map_err(|source| CorpusError::Io { path: path.display().to_string(), source })
    };
    parse_graph(open("artifacts.csv")?, open("edges.csv")?)
}

/// Writes the graph in the format read by [`load_graph`].
pub fn write_graph(dir: &Path, artifacts: &[ArtifactRecord], edges: &[GraphEdge]) -> Result<(), CorpusError> {
    use std::fmt::Write as _;
    let mut a = format!("{FORMAT_LINE}\n{}\n", ARTIFACTS_HEADER.join(","));
    for r in artifacts {
        let path = r.jar_path.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let c = &r.coords;
        let _ = writeln!(
            a,
            "{},{},{},{},{},{}",
            c.group,
            c.artifact,
            c.version,
            r.release_date.format("%Y-%m-%dT%H:%M:%SZ"),
            r.packaging,
            path
        );
    }
    let mut e = format!("{FORMAT_LINE}\n{}\n", EDGES_HEADER.join(","));
    for edge in edges {
        let (kind, scope) = match edge.kind {
            EdgeKind::Next => ("NEXT", ""),
            EdgeKind::Depends(s) => ("DEPENDS", s.as_str()),
        };
        let _ = writeln!(e, "{kind},{scope},{},{}", edge.from, edge.to);
    }
    std::fs::create_dir_all(dir).map_err(|source| CorpusError::Io { path: dir.display().to_string(), source })?;
    for (name, text) in [("artifacts.csv", a), ("edges.csv", e)] {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|source| CorpusError::Io { path: path.display().to_string(), source })?;
    }
    Ok(())
}
