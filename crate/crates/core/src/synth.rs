//! Synthetic volumes and masks for tests, benchmarks and the self-check.

use rand_core::RngCore;

use crate::sampling::seeded_rng;
use crate::volume::{BinaryMask, Dims, Spacing, Volume};

fn unit(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// Axis-aligned cube of side `side`, intensity 1, centered in an `n³` zero grid.
pub fn cube(n: usize, side: usize, id: &str) -> Volume {
    let dims = Dims::new(n, n, n);
    let lo = (n - side) / 2;
    let data = (0..dims.len())
        .map(|p| {
            let v = dims.unravel(p);
            let inside = [v.i, v.j, v.k].iter().all(|&c| (lo..lo + side).contains(&c));
            if inside { 1.0 } else { 0.0 }
        })
        .collect();
    Volume::new(dims, Spacing::UNIT, data, id).expect("valid grid")
}

/// Solid ball of radius `radius` voxels centered in an `n³` zero grid.
pub fn ball(n: usize, radius: f64, id: &str) -> Volume {
    let dims = Dims::new(n, n, n);
    let c = (n as f64 - 1.0) / 2.0;
    let data = (0..dims.len())
        .map(|p| {
            let v = dims.unravel(p);
            let d2 = [v.i, v.j, v.k].iter().map(|&x| (x as f64 - c).powi(2)).sum::<f64>();
            if d2 <= radius * radius { 1.0 } else { 0.0 }
        })
        .collect();
    Volume::new(dims, Spacing::UNIT, data, id).expect("valid grid")
}

/// Independent per-voxel coin flips with foreground probability `p`.
/// At least one voxel is forced to background.
pub fn random_mask(dims: Dims, p: f64, seed: u64) -> BinaryMask {
    let mut rng = seeded_rng(seed);
    let mut bits: Vec<bool> = (0..dims.len()).map(|_| unit(&mut rng) < p).collect();
    if bits.iter().all(|&b| b) {
        let at = (rng.next_u64() % dims.len() as u64) as usize;
        bits[at] = false;
    }
    BinaryMask::new(dims, bits).expect("length matches")
}

/// Union of random ellipsoidal blobs around the grid center; the border
/// layer is always background.
pub fn blob_mask(dims: Dims, seed: u64) -> BinaryMask {
    let mut rng = seeded_rng(seed);
    let ext = dims.as_array().map(|n| n as f64);
    let blobs: Vec<([f64; 3], [f64; 3])> = (0..8)
        .map(|_| {
            let center = ext.map(|e| e * (0.3 + 0.4 * unit(&mut rng)));
            let radii = ext.map(|e| e * (0.1 + 0.2 * unit(&mut rng)));
            (center, radii)
        })
        .collect();
    BinaryMask::from_fn(dims, |v| {
        let border = v.i == 0 || v.j == 0 || v.k == 0 || v.i + 1 == dims.nx || v.j + 1 == dims.ny || v.k + 1 == dims.nz;
        if border {
            return false;
        }
        let x = [v.i as f64, v.j as f64, v.k as f64];
        blobs.iter().any(|(c, r)| (0..3).map(|a| ((x[a] - c[a]) / r[a]).powi(2)).sum::<f64>() <= 1.0)
    })
}

/// Volume with intensity `1 + noise` on `mask` and zero elsewhere.
pub fn volume_from_mask(mask: &BinaryMask, spacing: Spacing, seed: u64, id: &str) -> Volume {
    let mut rng = seeded_rng(seed);
    let data = mask.bits().iter().map(|&b| if b { 1.0 + unit(&mut rng) as f32 } else { 0.0 }).collect();
    Volume::new(mask.dims(), spacing, data, id).expect("valid grid")
}
