//! Dense voxel grids shared by every stage of the pipeline.
//!
//! All grids use x-fastest linear order, `i + nx * (j + ny * k)`, which is
//! also the on-disk order of NIfTI-1 payloads.

use std::fmt;

use crate::error::{Error, Result};

/// Relative per-axis tolerance used when comparing voxel spacings.
pub const SPACING_REL_TOL: f64 = 1e-4;

/// Default intensity at or below which a voxel counts as background.
pub const DEFAULT_BG_THRESHOLD: f32 = 0.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dims {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
}

impl Dims {
    pub const fn new(nx: usize, ny: usize, nz: usize) -> Self {
        Self { nx, ny, nz }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_array(&self) -> [usize; 3] {
        [self.nx, self.ny, self.nz]
    }

    #[inline]
    pub fn linear(&self, idx: VoxelIndex) -> usize {
        idx.i + self.nx * (idx.j + self.ny * idx.k)
    }

    #[inline]
    pub fn unravel(&self, linear: usize) -> VoxelIndex {
        let i = linear % self.nx;
        let rest = linear / self.nx;
        VoxelIndex { i, j: rest % self.ny, k: rest / self.ny }
    }

    pub fn contains(&self, idx: VoxelIndex) -> bool {
        idx.i < self.nx && idx.j < self.ny && idx.k < self.nz
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.nx, self.ny, self.nz)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VoxelIndex {
    pub i: usize,
    pub j: usize,
    pub k: usize,
}

impl VoxelIndex {
    pub const fn new(i: usize, j: usize, k: usize) -> Self {
        Self { i, j, k }
    }
}

/// Physical voxel size in millimeters along x, y and z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spacing(pub [f64; 3]);

impl Spacing {
    pub const UNIT: Spacing = Spacing([1.0, 1.0, 1.0]);

    pub fn new(sx: f64, sy: f64, sz: f64) -> Result<Self> {
        let s = Spacing([sx, sy, sz]);
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        for (axis, &v) in self.0.iter().enumerate() {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidVolume(format!(
                    "spacing on axis {axis} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn axis(&self, axis: usize) -> f64 {
        self.0[axis]
    }
}

impl Default for Spacing {
    fn default() -> Self {
        Spacing::UNIT
    }
}

/// Orientation fields carried through from a NIfTI header untouched.
/// They are never interpreted; mixing only requires identical grids.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Orientation {
    pub qfac: f32,
    pub qform_code: i16,
    pub sform_code: i16,
    /// quatern_b, quatern_c, quatern_d, qoffset_x, qoffset_y, qoffset_z
    pub quatern: [f32; 6],
    /// srow_x, srow_y, srow_z
    pub srow: [[f32; 4]; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Volume {
    dims: Dims,
    spacing: Spacing,
    data: Vec<f32>,
    id: String,
    orientation: Option<Orientation>,
}

impl Volume {
    pub fn new(dims: Dims, spacing: Spacing, data: Vec<f32>, id: impl Into<String>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidVolume(format!("zero-voxel grid {dims}")));
        }
        if data.len() != dims.len() {
            return Err(Error::InvalidVolume(format!(
                "data length {} does not match {dims} = {}",
                data.len(),
                dims.len()
            )));
        }
        spacing.validate()?;
        if let Some(p) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteData(p));
        }
        Ok(Self { dims, spacing, data, id: id.into(), orientation: None })
    }

    /// A grid filled with zeros.
    pub fn zeros(dims: Dims, spacing: Spacing, id: impl Into<String>) -> Result<Self> {
        Self::new(dims, spacing, vec![0.0; dims.len()], id)
    }

    pub fn with_orientation(mut self, orientation: Option<Orientation>) -> Self {
        self.orientation = orientation;
        self
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn orientation(&self) -> Option<&Orientation> {
        self.orientation.as_ref()
    }

    pub fn get(&self, idx: VoxelIndex) -> f32 {
        self.data[self.dims.linear(idx)]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    dims: Dims,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(dims: Dims, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != dims.len() {
            return Err(Error::InvalidVolume(format!(
                "mask length {} does not match {dims} = {}",
                bits.len(),
                dims.len()
            )));
        }
        Ok(Self { dims, bits })
    }

    pub fn filled(dims: Dims, value: bool) -> Self {
        Self { dims, bits: vec![value; dims.len()] }
    }

    pub fn from_fn(dims: Dims, mut f: impl FnMut(VoxelIndex) -> bool) -> Self {
        let bits = (0..dims.len()).map(|p| f(dims.unravel(p))).collect();
        Self { dims, bits }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, idx: VoxelIndex) -> bool {
        self.bits[self.dims.linear(idx)]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn union(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn complement(&self) -> BinaryMask {
        BinaryMask { dims: self.dims, bits: self.bits.iter().map(|b| !b).collect() }
    }

    fn zip_with(&self, other: &BinaryMask, f: impl Fn(bool, bool) -> bool) -> Result<BinaryMask> {
        if self.dims != other.dims {
            return Err(Error::DimsMismatch { a: self.dims, b: other.dims });
        }
        let bits = self.bits.iter().zip(&other.bits).map(|(&a, &b)| f(a, b)).collect();
        Ok(BinaryMask { dims: self.dims, bits })
    }
}

/// Voxels with intensity strictly above `bg_threshold`. The complement is
/// the background set used by the distance transform.
pub fn foreground_mask(v: &Volume, bg_threshold: f32) -> BinaryMask {
    BinaryMask { dims: v.dims, bits: v.data.iter().map(|&x| x > bg_threshold).collect() }
}

/// Checks that two volumes share a voxel grid so they can be mixed voxelwise.
pub fn validate_pair(a: &Volume, b: &Volume) -> Result<()> {
    if a.dims != b.dims {
        return Err(Error::ShapeMismatch { a: a.dims, b: b.dims });
    }
    for axis in 0..3 {
        let (sa, sb) = (a.spacing.0[axis], b.spacing.0[axis]);
        if (sa - sb).abs() > SPACING_REL_TOL * sa.abs().max(sb.abs()) {
            return Err(Error::SpacingMismatch { axis, a: sa, b: sb });
        }
    }
    Ok(())
}
