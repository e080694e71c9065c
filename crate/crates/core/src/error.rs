use std::io;
use std::path::PathBuf;

use crate::volume::Dims;

/// Coarse classification of an [`Error`], used by front ends to pick
/// exit codes and by batch drivers to decide whether to skip a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Invalid parameters or arguments.
    Usage,
    /// File system or file format failure.
    Io,
    /// No admissible threshold pair exists.
    Infeasible,
    /// Inputs are well formed but cannot be processed (shape mismatch,
    /// empty background, empty mix).
    Degenerate,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: {a} vs {b}")]
    ShapeMismatch { a: Dims, b: Dims },

    #[error("spacing mismatch on axis {axis}: {a} mm vs {b} mm")]
    SpacingMismatch { axis: usize, a: f64, b: f64 },

    #[error("grid dimensions differ: {a} vs {b}")]
    DimsMismatch { a: Dims, b: Dims },

    #[error("invalid volume: {0}")]
    InvalidVolume(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("EmptyBackground: no background voxel, distance transform is undefined")]
    EmptyBackground,

    #[error("EmptyForeground: union of foreground masks is empty")]
    EmptyForeground,

    #[error("InfeasibleThresholds: best candidate keeps only {best_fraction:.4} of the foreground in its smallest region (need {min_fraction})")]
    InfeasibleThresholds { best_fraction: f64, min_fraction: f64 },

    #[error("DegenerateMix: no voxel is assigned to either source (P_a + P_b = 0)")]
    DegenerateMix,

    #[error("ClassCountMismatch: {0} vs {1} classes")]
    ClassCountMismatch(usize, usize),

    #[error("invalid soft label: {0}")]
    InvalidLabel(String),

    #[error("ZeroCount: class {0} has no samples")]
    ZeroCount(usize),

    #[error("BadMagic: {0}")]
    BadMagic(String),

    #[error("UnsupportedDatatype: NIfTI datatype code {0}")]
    UnsupportedDatatype(i16),

    #[error("TruncatedFile: expected at least {expected} bytes, found {found}")]
    TruncatedFile { expected: usize, found: usize },

    #[error("NonFiniteData: voxel {0} is not finite")]
    NonFiniteData(usize),

    #[error("BadHeader: {0}")]
    BadHeader(String),

    #[error("BadLabel: {0}")]
    BadLabel(String),

    #[error("EmptyManifest: {0}")]
    EmptyManifest(PathBuf),

    #[error("InconsistentRecord: {0}")]
    InconsistentRecord(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("malformed record: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParameter(_) | Error::InvalidLabel(_) | Error::ClassCountMismatch(..) => {
                ErrorKind::Usage
            }
            Error::ShapeMismatch { .. }
            | Error::SpacingMismatch { .. }
            | Error::DimsMismatch { .. }
            | Error::InvalidVolume(_)
            | Error::EmptyBackground
            | Error::EmptyForeground
            | Error::DegenerateMix
            | Error::ZeroCount(_) => ErrorKind::Degenerate,
            Error::InfeasibleThresholds { .. } => ErrorKind::Infeasible,
            Error::BadMagic(_)
            | Error::UnsupportedDatatype(_)
            | Error::TruncatedFile { .. }
            | Error::NonFiniteData(_)
            | Error::BadHeader(_)
            | Error::BadLabel(_)
            | Error::EmptyManifest(_)
            | Error::InconsistentRecord(_)
            | Error::Io { .. }
            | Error::Json(_) => ErrorKind::Io,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
