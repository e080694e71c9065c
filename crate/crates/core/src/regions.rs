//! Distance-band regions of a volume pair.
//!
//! Given distance fields `da`, `db` and cut points `t1 <= t2`, every voxel is
//! assigned to exactly one of:
//!
//! * `R1 = [da <= t1]`
//! * `R2 = [t1 < db <= t2] (1 - R1)`
//! * `R3 = [t1 < da <= t2] (1 - R1)(1 - R2)`
//! * `R4 = [db > t2] (1 - R1)(1 - R2)(1 - R3)`
//! * residual: none of the above, which reduces to `da > t2 && db <= t1`.

use crate::edt::DistanceField;
use crate::error::{Error, Result};
use crate::volume::{BinaryMask, Dims};

pub const DEFAULT_MIN_FRACTION: f64 = 0.10;
pub const DEFAULT_Q1: f64 = 1.0 / 3.0;
pub const DEFAULT_Q2: f64 = 2.0 / 3.0;

/// Upper bound for `min_fraction`: four regions cannot each hold more than a quarter.
pub const MAX_MIN_FRACTION: f64 = 0.25;

/// Fallback grid searched when the requested quantiles are infeasible, in tenths.
const GRID_TENTHS: std::ops::RangeInclusive<u32> = 1..=9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    R1,
    R2,
    R3,
    R4,
    Residual,
}

impl Region {
    pub const ALL: [Region; 5] = [Region::R1, Region::R2, Region::R3, Region::R4, Region::Residual];

    /// Region of a single voxel with distances `(da, db)`.
    #[inline]
    pub fn classify(da: f64, db: f64, t1: f64, t2: f64) -> Region {
        if da <= t1 {
            Region::R1
        } else if t1 < db && db <= t2 {
            Region::R2
        } else if da <= t2 {
            Region::R3
        } else if db > t2 {
            Region::R4
        } else {
            Region::Residual
        }
    }

    fn slot(self) -> usize {
        match self {
            Region::R1 => 0,
            Region::R2 => 1,
            Region::R3 => 2,
            Region::R4 => 3,
            Region::Residual => 4,
        }
    }
}

/// How a pair of thresholds was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileChoice {
    pub q1: f64,
    pub q2: f64,
    pub min_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub t1: f64,
    pub t2: f64,
    /// `None` for user-supplied cut points.
    pub selection: Option<QuantileChoice>,
}

impl Thresholds {
    pub fn explicit(t1: f64, t2: f64) -> Result<Self> {
        let t = Thresholds { t1, t2, selection: None };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t1.is_finite() && self.t2.is_finite() && 0.0 <= self.t1 && self.t1 <= self.t2) {
            return Err(Error::InvalidParameter(format!(
                "thresholds must satisfy 0 <= t1 <= t2, got t1 = {}, t2 = {}",
                self.t1, self.t2
            )));
        }
        if let Some(q) = self.selection {
            check_quantiles(q.q1, q.q2)?;
        }
        Ok(())
    }
}

/// Voxel counts of R1, R2, R3, R4 and the residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub struct RegionCounts {
    pub r1: usize,
    pub r2: usize,
    pub r3: usize,
    pub r4: usize,
    pub residual: usize,
}

impl RegionCounts {
    fn from_slots(s: [usize; 5]) -> Self {
        RegionCounts { r1: s[0], r2: s[1], r3: s[2], r4: s[3], residual: s[4] }
    }

    pub fn get(&self, region: Region) -> usize {
        match region {
            Region::R1 => self.r1,
            Region::R2 => self.r2,
            Region::R3 => self.r3,
            Region::R4 => self.r4,
            Region::Residual => self.residual,
        }
    }

    pub fn total(&self) -> usize {
        self.r1 + self.r2 + self.r3 + self.r4 + self.residual
    }

    /// Size of the smallest of R1..R4.
    pub fn smallest_region(&self) -> usize {
        self.r1.min(self.r2).min(self.r3).min(self.r4)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionMasks {
    pub r1: BinaryMask,
    pub r2: BinaryMask,
    pub r3: BinaryMask,
    pub r4: BinaryMask,
    pub residual: BinaryMask,
    pub counts: RegionCounts,
}

impl RegionMasks {
    pub fn dims(&self) -> Dims {
        self.r1.dims()
    }

    pub fn mask(&self, region: Region) -> &BinaryMask {
        match region {
            Region::R1 => &self.r1,
            Region::R2 => &self.r2,
            Region::R3 => &self.r3,
            Region::R4 => &self.r4,
            Region::Residual => &self.residual,
        }
    }

    /// Region of voxel `p` (linear index).
    pub fn region_at(&self, p: usize) -> Region {
        Region::ALL
            .into_iter()
            .find(|&r| self.mask(r).bits()[p])
            .expect("region masks partition the grid")
    }

    /// Counts restricted to the voxels set in `within`.
    pub fn counts_within(&self, within: &BinaryMask) -> Result<RegionCounts> {
        if within.dims() != self.dims() {
            return Err(Error::DimsMismatch { a: self.dims(), b: within.dims() });
        }
        let mut slots = [0usize; 5];
        for (p, _) in within.bits().iter().enumerate().filter(|(_, &b)| b) {
            slots[self.region_at(p).slot()] += 1;
        }
        Ok(RegionCounts::from_slots(slots))
    }
}

fn check_fields(da: &DistanceField, db: &DistanceField) -> Result<()> {
    if da.dims() != db.dims() {
        return Err(Error::DimsMismatch { a: da.dims(), b: db.dims() });
    }
    Ok(())
}

fn check_quantiles(q1: f64, q2: f64) -> Result<()> {
    if !(0.0 < q1 && q1 < q2 && q2 < 1.0) {
        return Err(Error::InvalidParameter(format!("quantiles must satisfy 0 < q1 < q2 < 1, got {q1}, {q2}")));
    }
    Ok(())
}

pub fn check_min_fraction(min_fraction: f64) -> Result<()> {
    if !(min_fraction > 0.0 && min_fraction <= MAX_MIN_FRACTION) {
        return Err(Error::InvalidParameter(format!(
            "min_fraction must lie in (0, {MAX_MIN_FRACTION}], got {min_fraction}"
        )));
    }
    Ok(())
}

/// One-based nearest rank `ceil(q * n)`, clamped to `[1, n]`.
///
/// Products that land within rounding noise of an integer are snapped to it,
/// so e.g. `q = 0.3, n = 10` yields rank 3 rather than 4.
pub fn nearest_rank(q: f64, n: usize) -> usize {
    let x = q * n as f64;
    let r = x.round();
    let rank = if (x - r).abs() <= 1e-9 * r.abs().max(1.0) { r } else { x.ceil() };
    (rank as usize).clamp(1, n.max(1))
}

/// Nearest-rank quantile of an ascending slice.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    sorted[nearest_rank(q, sorted.len()) - 1]
}

/// Builds the five region masks, evaluating each indicator in order.
pub fn build_region_masks(da: &DistanceField, db: &DistanceField, t: &Thresholds) -> Result<RegionMasks> {
    check_fields(da, db)?;
    t.validate()?;
    let dims = da.dims();
    let n = dims.len();
    let mut bits: [Vec<bool>; 5] = std::array::from_fn(|_| vec![false; n]);
    let mut slots = [0usize; 5];
    for (p, (&a, &b)) in da.values().iter().zip(db.values()).enumerate() {
        let s = Region::classify(a, b, t.t1, t.t2).slot();
        bits[s][p] = true;
        slots[s] += 1;
    }
    let [r1, r2, r3, r4, residual] = bits.map(|b| BinaryMask::new(dims, b).expect("length checked"));
    Ok(RegionMasks { r1, r2, r3, r4, residual, counts: RegionCounts::from_slots(slots) })
}

/// Region counts over the foreground union for one threshold pair.
fn union_counts(pairs: &[(f64, f64)], t1: f64, t2: f64) -> RegionCounts {
    let mut slots = [0usize; 5];
    for &(a, b) in pairs {
        slots[Region::classify(a, b, t1, t2).slot()] += 1;
    }
    RegionCounts::from_slots(slots)
}

/// Chooses one shared `(t1, t2)` for a pair so that each of R1..R4 holds at
/// least `min_fraction` of the voxels in `fg_a ∪ fg_b`.
///
/// The requested quantiles `(q1, q2)` of the pooled foreground distances are
/// tried first. If they leave a region too small, every pair of tenths
/// `q1' < q2'` is scored by its smallest region, and the best one is returned
/// when it meets the bound.
pub fn select_thresholds(
    da: &DistanceField,
    db: &DistanceField,
    fg_a: &BinaryMask,
    fg_b: &BinaryMask,
    min_fraction: f64,
    q1: f64,
    q2: f64,
) -> Result<Thresholds> {
    check_min_fraction(min_fraction)?;
    check_quantiles(q1, q2)?;
    check_fields(da, db)?;
    for m in [fg_a, fg_b] {
        if m.dims() != da.dims() {
            return Err(Error::DimsMismatch { a: da.dims(), b: m.dims() });
        }
    }

    let (a, b) = (da.values(), db.values());
    let mut pooled = Vec::new();
    let mut union = Vec::new();
    for (p, (&in_a, &in_b)) in fg_a.bits().iter().zip(fg_b.bits()).enumerate() {
        if in_a {
            pooled.push(a[p]);
        }
        if in_b {
            pooled.push(b[p]);
        }
        if in_a || in_b {
            union.push((a[p], b[p]));
        }
    }
    if union.is_empty() {
        return Err(Error::EmptyForeground);
    }
    pooled.sort_unstable_by(f64::total_cmp);

    let needed = min_fraction * union.len() as f64;
    let feasible = |c: &RegionCounts| c.smallest_region() as f64 >= needed;
    let choice = |q1, q2| QuantileChoice { q1, q2, min_fraction };

    let (t1, t2) = (quantile_sorted(&pooled, q1), quantile_sorted(&pooled, q2));
    if feasible(&union_counts(&union, t1, t2)) {
        return Ok(Thresholds { t1, t2, selection: Some(choice(q1, q2)) });
    }

    let mut best: Option<(usize, u32, u32)> = None;
    for lo in GRID_TENTHS {
        for hi in (lo + 1)..=*GRID_TENTHS.end() {
            let t1 = pooled[ceil_tenths(lo, pooled.len()) - 1];
            let t2 = pooled[ceil_tenths(hi, pooled.len()) - 1];
            let smallest = union_counts(&union, t1, t2).smallest_region();
            // strict improvement keeps the earliest (smallest q1', then q2') on ties
            if best.is_none_or(|(s, _, _)| smallest > s) {
                best = Some((smallest, lo, hi));
            }
        }
    }
    let (smallest, lo, hi) = best.expect("grid is non-empty");
    if smallest as f64 >= needed {
        let t1 = pooled[ceil_tenths(lo, pooled.len()) - 1];
        let t2 = pooled[ceil_tenths(hi, pooled.len()) - 1];
        Ok(Thresholds { t1, t2, selection: Some(choice(lo as f64 / 10.0, hi as f64 / 10.0)) })
    } else {
        Err(Error::InfeasibleThresholds {
            best_fraction: smallest as f64 / union.len() as f64,
            min_fraction,
        })
    }
}

/// `ceil(tenths * n / 10)` in integer arithmetic, clamped to `[1, n]`.
fn ceil_tenths(tenths: u32, n: usize) -> usize {
    (tenths as usize * n).div_ceil(10).clamp(1, n)
}
