//! File formats: NIfTI-1 volumes, CSV manifests and MixRecord JSON.

pub mod manifest;
pub mod nifti;
pub mod record;

pub use manifest::{read_manifest, ManifestEntry};
pub use nifti::{encode_nifti, parse_nifti, read_nifti, write_nifti};
pub use record::{append_mix_record, encode_mix_record, read_mix_records, write_mix_record, MIX_RECORD_FORMAT_VERSION};
