use std::collections::BTreeSet;
use std::io::{Cursor, Read, Write};
use std::path::Path;

use log::warn;
use rayon::prelude::*;
use zip::write::SimpleFileOptions;

use super::{parse_class, ClassError, Language, RawClass};

#[derive(Debug, thiserror::Error)]
pub enum JarError {
    #[error("{path}: not a ZIP archive: {source}")]
    NotAZip {
        path: String,
        #[source]
        source: zip::result::ZipError,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug)]
pub struct EntryFailure {
    pub path: String,
    pub error: ClassError,
}

/// Parsed content of one JAR.
#[derive(Debug, Default)]
pub struct JarContent {
    /// Identifier of the archive (its path, or a caller-supplied label).
    pub id: String,
    /// Successfully parsed classes, sorted by entry path.
    pub entries: Vec<(String, RawClass)>,
    pub non_class_entries: usize,
    pub detected_languages: BTreeSet<Language>,
    /// Class entries that failed to parse. They are logged and skipped.
    pub failures: Vec<EntryFailure>,
}

impl JarContent {
    pub fn classes(&self) -> impl Iterator<Item = &RawClass> {
        self.entries.iter().map(|(_, c)| c)
    }

    pub fn is_java_only(&self) -> bool {
        self.detected_languages.iter().all(Language::is_java_compatible)
    }

    /// Highest class-file major version in the archive.
    pub fn max_major_version(&self) -> Option<u16> {
        self.classes().map(|c| c.major_version).max()
    }
}

pub fn open_jar(path: &Path) -> Result<JarContent, JarError> {
    let bytes = std::fs::read(path).map_err(|source| JarError::Io { path: path.display().to_string(), source })?;
    read_jar(&bytes, &path.display().to_string())
}

/// Reads a JAR held in memory. Entry-level parse failures are recorded in
/// [`JarContent::failures`] rather than returned.
pub fn read_jar(bytes: &[u8], id: &str) -> Result<JarContent, JarError> {
    let mut archive = zip::ZipArchive::new(Cursor::new(bytes))
        .map_err(|source| JarError::NotAZip { path: id.to_string(), source })?;
    let mut raw_entries = Vec::new();
    let mut non_class_entries = 0;
    for i in 0..archive.len() {
        let mut file = archive.by_index(i).map_err(|source| JarError::NotAZip { path: id.to_string(), source })?;
        if file.is_dir() {
            continue;
        }
        let name = file.name().to_string();
        if !name.ends_with(".class") || name.ends_with("module-info.class") {
            non_class_entries += 1;
            continue;
        }
        let mut data = Vec::with_capacity(file.size() as usize);
        file.read_to_end(&mut data).map_err(|source| JarError::Io { path: format!("{id}!{name}"), source })?;
        raw_entries.push((name, data));
    }
    let parsed: Vec<(String, Result<RawClass, ClassError>)> = raw_entries
        .into_par_iter()
        .map(|(name, data)| {
            let res = parse_class(&data);
            (name, res)
        })
        .collect();

    let mut content = JarContent { id: id.to_string(), non_class_entries, ..Default::default() };
    for (path, res) in parsed {
        match res {
            Ok(class) => {
                content.detected_languages.insert(Language::from_source_file(class.source_file.as_deref()));
                content.entries.push((path, class));
            }
            Err(error) => {
                warn!("{id}!{path}: skipping unreadable class: {error}");
                content.failures.push(EntryFailure { path, error });
            }
        }
    }
    content.entries.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(content)
}

/// Builds an uncompressed-metadata ZIP archive in memory.
pub fn jar_bytes(entries: &[(String, Vec<u8>)]) -> std::io::Result<Vec<u8>> {
    let mut zip = zip::ZipWriter::new(Cursor::new(Vec::new()));
    // fixed timestamp keeps fixture archives byte-reproducible
    let options = SimpleFileOptions::default()
        .compression_method(zip::CompressionMethod::Deflated)
        .last_modified_time(zip::DateTime::default());
    for (name, data) in entries {
        zip.start_file(name.as_str(), options).map_err(std::io::Error::other)?;
        zip.write_all(data)?;
    }
    Ok(zip.finish().map_err(std::io::Error::other)?.into_inner())
}

pub fn write_jar(path: &Path, entries: &[(String, Vec<u8>)]) -> std::io::Result<()> {
    std::fs::write(path, jar_bytes(entries)?)
}
