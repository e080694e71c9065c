//! MixRecord sidecars: one JSON object per file, or JSON Lines for batches.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::mixer::MixRecord;

/// Version of the MixRecord JSON layout.
pub const MIX_RECORD_FORMAT_VERSION: u32 = 1;

/// Encodes a record as a single JSON line (no trailing newline).
/// Floats use the shortest representation that parses back to the same value.
pub fn encode_mix_record(r: &MixRecord) -> Result<String> {
    r.check_consistency()?;
    Ok(serde_json::to_string(r)?)
}

pub fn write_mix_record(path: impl AsRef<Path>, r: &MixRecord) -> Result<()> {
    let path = path.as_ref();
    let mut line = encode_mix_record(r)?;
    line.push('\n');
    std::fs::write(path, line).map_err(|e| Error::io(path, e))
}

/// Appends one record as a JSON line.
pub fn append_mix_record(path: impl AsRef<Path>, r: &MixRecord) -> Result<()> {
    let path = path.as_ref();
    let line = encode_mix_record(r)?;
    let mut f = OpenOptions::new().create(true).append(true).open(path).map_err(|e| Error::io(path, e))?;
    writeln!(f, "{line}").map_err(|e| Error::io(path, e))
}

/// Reads a JSON Lines file (a single-record file is a one-line JSON Lines file).
pub fn read_mix_records(path: impl AsRef<Path>) -> Result<Vec<MixRecord>> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for line in BufReader::new(f).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line)?);
    }
    Ok(out)
}
