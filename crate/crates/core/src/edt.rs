//! Exact Euclidean distance transform.
//!
//! [`edt`] runs the separable lower-envelope algorithm of Felzenszwalb and
//! Huttenlocher once per axis over squared distances, weighting each axis by
//! its squared voxel spacing. [`edt_brute`] evaluates the nearest-background
//! minimum directly and is kept as the reference implementation.

use crate::error::{Error, Result};
use crate::volume::{BinaryMask, Dims, Spacing, Volume};

/// Per-voxel distance (mm) to the nearest background voxel.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    dims: Dims,
    spacing: Spacing,
    values: Vec<f64>,
}

impl DistanceField {
    /// Wraps precomputed distances. Values must be finite and non-negative.
    pub fn from_values(dims: Dims, spacing: Spacing, values: Vec<f64>) -> Result<Self> {
        if values.len() != dims.len() {
            return Err(Error::InvalidVolume(format!(
                "distance field length {} does not match {dims}",
                values.len()
            )));
        }
        spacing.validate()?;
        if let Some(p) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::NonFiniteData(p));
        }
        Ok(Self { dims, spacing, values })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Converts to a float32 volume, e.g. for writing to disk.
    pub fn to_volume(&self, id: impl Into<String>) -> Result<Volume> {
        let data = self.values.iter().map(|&v| v as f32).collect();
        Volume::new(self.dims, self.spacing, data, id)
    }
}

/// Squared distances from the separable algorithm, before the final square root.
pub fn edt_squared(fg: &BinaryMask, spacing: Spacing) -> Result<Vec<f64>> {
    spacing.validate()?;
    let bits = fg.bits();
    if bits.iter().all(|&b| b) {
        return Err(Error::EmptyBackground);
    }
    let Dims { nx, ny, nz } = fg.dims();
    let mut grid: Vec<f64> = bits.iter().map(|&b| if b { f64::INFINITY } else { 0.0 }).collect();

    let longest = nx.max(ny).max(nz);
    let mut scratch = Envelope::with_capacity(longest);
    let mut line = vec![0.0f64; longest];
    let mut out = vec![0.0f64; longest];
    let [wx, wy, wz] = spacing.0.map(|s| s * s);

    for row in grid.chunks_exact_mut(nx) {
        line[..nx].copy_from_slice(row);
        scratch.transform(&line[..nx], wx, &mut out[..nx]);
        row.copy_from_slice(&out[..nx]);
    }

    for slab in grid.chunks_exact_mut(nx * ny) {
        for i in 0..nx {
            for j in 0..ny {
                line[j] = slab[i + nx * j];
            }
            scratch.transform(&line[..ny], wy, &mut out[..ny]);
            for j in 0..ny {
                slab[i + nx * j] = out[j];
            }
        }
    }

    let plane = nx * ny;
    for p in 0..plane {
        for k in 0..nz {
            line[k] = grid[p + plane * k];
        }
        scratch.transform(&line[..nz], wz, &mut out[..nz]);
        for k in 0..nz {
            grid[p + plane * k] = out[k];
        }
    }

    Ok(grid)
}

/// Exact Euclidean distance transform of a foreground mask.
pub fn edt(fg: &BinaryMask, spacing: Spacing) -> Result<DistanceField> {
    let mut values = edt_squared(fg, spacing)?;
    for v in &mut values {
        *v = v.sqrt();
    }
    Ok(DistanceField { dims: fg.dims(), spacing, values })
}

/// Squared distances by exhaustive search over all background voxels.
pub fn edt_brute_squared(fg: &BinaryMask, spacing: Spacing) -> Result<Vec<f64>> {
    spacing.validate()?;
    let dims = fg.dims();
    let background: Vec<[f64; 3]> = fg
        .bits()
        .iter()
        .enumerate()
        .filter(|(_, &b)| !b)
        .map(|(p, _)| {
            let v = dims.unravel(p);
            [v.i as f64, v.j as f64, v.k as f64]
        })
        .collect();
    if background.is_empty() {
        return Err(Error::EmptyBackground);
    }
    let [sx, sy, sz] = spacing.0;
    let values = fg
        .bits()
        .iter()
        .enumerate()
        .map(|(p, &is_fg)| {
            if !is_fg {
                return 0.0;
            }
            let v = dims.unravel(p);
            let (i, j, k) = (v.i as f64, v.j as f64, v.k as f64);
            background
                .iter()
                .map(|q| {
                    let dx = sx * (i - q[0]);
                    let dy = sy * (j - q[1]);
                    let dz = sz * (k - q[2]);
                    dx * dx + dy * dy + dz * dz
                })
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    Ok(values)
}

/// Reference distance transform: `min over background q of |p - q|` in mm.
pub fn edt_brute(fg: &BinaryMask, spacing: Spacing) -> Result<DistanceField> {
    let values = edt_brute_squared(fg, spacing)?.into_iter().map(f64::sqrt).collect();
    Ok(DistanceField { dims: fg.dims(), spacing, values })
}

/// Reusable buffers for the 1D lower envelope of parabolas.
struct Envelope {
    sites: Vec<usize>,
    bounds: Vec<f64>,
}

impl Envelope {
    fn with_capacity(n: usize) -> Self {
        Self { sites: Vec::with_capacity(n), bounds: Vec::with_capacity(n + 1) }
    }

    /// `out[q] = min_p weight * (q - p)^2 + f[p]`. Sites with infinite `f`
    /// contribute no parabola; a line without finite sites stays infinite.
    fn transform(&mut self, f: &[f64], weight: f64, out: &mut [f64]) {
        self.sites.clear();
        self.bounds.clear();

        for (q, &fq) in f.iter().enumerate() {
            if fq == f64::INFINITY {
                continue;
            }
            let qf = q as f64;
            let mut s = f64::NEG_INFINITY;
            while let Some(&v) = self.sites.last() {
                let vf = v as f64;
                s = ((fq + weight * qf * qf) - (f[v] + weight * vf * vf)) / (2.0 * weight * (qf - vf));
                if s <= *self.bounds.last().unwrap() {
                    self.sites.pop();
                    self.bounds.pop();
                } else {
                    break;
                }
            }
            if self.sites.is_empty() {
                s = f64::NEG_INFINITY;
            }
            self.sites.push(q);
            self.bounds.push(s);
        }

        if self.sites.is_empty() {
            out.fill(f64::INFINITY);
            return;
        }

        let mut k = 0;
        for (q, o) in out.iter_mut().enumerate() {
            let qf = q as f64;
            while k + 1 < self.sites.len() && self.bounds[k + 1] < qf {
                k += 1;
            }
            let v = self.sites[k];
            let d = qf - v as f64;
            *o = weight * d * d + f[v];
        }
    }
}
