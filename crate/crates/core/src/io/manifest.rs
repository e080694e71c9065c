//! Dataset manifests: CSV with header `path,label[,id]`.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::io::nifti::volume_id;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub label: usize,
    pub id: String,
}

/// Reads a manifest, resolving relative paths against the manifest's
/// directory. Labels must lie in `[0, num_classes)`.
pub fn read_manifest(path: impl AsRef<Path>, num_classes: usize) -> Result<Vec<ManifestEntry>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_manifest(&text, base, num_classes, path)
}

fn parse_manifest(text: &str, base: &Path, num_classes: usize, origin: &Path) -> Result<Vec<ManifestEntry>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| Error::BadHeader(e.to_string()))?.clone();
    let cols: Vec<&str> = header.iter().collect();
    let has_id = match cols.as_slice() {
        ["path", "label"] => false,
        ["path", "label", "id"] => true,
        _ => {
            return Err(Error::BadHeader(format!(
                "expected `path,label` or `path,label,id`, found `{}`",
                cols.join(",")
            )))
        }
    };

    let mut entries = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let line = row + 2;
        let record = record.map_err(|e| Error::BadHeader(format!("line {line}: {e}")))?;
        let raw_path = record.get(0).unwrap_or_default();
        if raw_path.is_empty() {
            return Err(Error::BadHeader(format!("line {line}: empty path")));
        }
        let raw_label = record.get(1).unwrap_or_default();
        let label: usize = raw_label
            .parse()
            .map_err(|_| Error::BadLabel(format!("line {line}: `{raw_label}` is not a class index")))?;
        if label >= num_classes {
            return Err(Error::BadLabel(format!(
                "line {line}: label {label} outside [0, {num_classes})"
            )));
        }
        let rel = Path::new(raw_path);
        let path = if rel.is_absolute() { rel.to_path_buf() } else { base.join(rel) };
        let id = match record.get(2).filter(|s| has_id && !s.is_empty()) {
            Some(id) => id.to_string(),
            None => volume_id(&path),
        };
        entries.push(ManifestEntry { path, label, id });
    }
    if entries.is_empty() {
        return Err(Error::EmptyManifest(origin.to_path_buf()));
    }
    Ok(entries)
}
