//! Distance-transform guided mixup for 3D volumes.
//!
//! The pipeline for one ordered pair `(xa, xb)`:
//!
//! 1. [`volume::foreground_mask`] splits each volume into foreground and background.
//! 2. [`edt::edt`] computes the exact Euclidean distance to the nearest background voxel.
//! 3. [`regions::select_thresholds`] picks shared cut points `t1 <= t2` so that
//!    every region keeps a minimum share of the foreground.
//! 4. [`regions::build_region_masks`] partitions the grid into R1..R4 plus a residual.
//! 5. [`mixer::mix_images`] takes R1/R3 from `xa` and R2/R4 from `xb`;
//!    [`mixer::mix_labels`] weights the parents' labels by those voxel counts.
//!
//! [`mixer::mix_pair`] runs all of it. [`loss`] holds the weighted soft
//! cross-entropy used to train on the mixed labels.

pub mod edt;
pub mod error;
pub mod io;
pub mod loss;
pub mod mixer;
pub mod regions;
pub mod sampling;
pub mod selfcheck;
pub mod synth;
pub mod volume;

pub use edt::{edt, edt_brute, DistanceField};
pub use error::{Error, ErrorKind, Result};
pub use mixer::{mix_pair, MixConfig, MixRecord, MixedSample, SoftLabel};
pub use regions::{RegionMasks, Thresholds};
pub use volume::{BinaryMask, Dims, Spacing, Volume, VoxelIndex};
