//! Embedded invariant suite run by `dtmix selfcheck`.

use std::time::Instant;

use rand_core::RngCore;

use crate::edt::{edt_brute_squared, edt_squared};
use crate::error::Result;
use crate::loss::{soft_ce_grad_logits, soft_cross_entropy, softmax, ClassWeights};
use crate::mixer::{mix_labels, CountDomain, SoftLabel};
use crate::regions::{build_region_masks, Region, Thresholds};
use crate::edt::DistanceField;
use crate::sampling::seeded_rng;
use crate::synth::random_mask;
use crate::volume::{BinaryMask, Dims, Spacing};

/// Signature of a squared-distance transform under test.
pub type SquaredEdtFn = fn(&BinaryMask, Spacing) -> Result<Vec<f64>>;

/// Central finite-difference step for the gradient check.
pub const FD_STEP: f64 = 1e-5;
/// Componentwise relative tolerance for the gradient check.
pub const FD_REL_TOL: f64 = 1e-4;
/// Gradient components below this magnitude are compared on this absolute scale.
pub const FD_SCALE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct GroupOutcome {
    pub name: &'static str,
    pub cases: usize,
    pub failure: Option<String>,
    pub seconds: f64,
}

impl GroupOutcome {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

fn unit(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

fn timed(name: &'static str, f: impl FnOnce() -> (usize, Option<String>)) -> GroupOutcome {
    let start = Instant::now();
    let (cases, failure) = f();
    GroupOutcome { name, cases, failure, seconds: start.elapsed().as_secs_f64() }
}

/// EDT vs brute force on random grids between 8³ and 16³, unit spacing and anisotropic.
pub fn check_edt(edt_fn: SquaredEdtFn, cases: usize, seed: u64) -> (usize, Option<String>) {
    let mut rng = seeded_rng(seed);
    for case in 0..cases {
        let side = |rng: &mut _| 8 + (RngCore::next_u64(rng) % 9) as usize;
        let dims = Dims::new(side(&mut rng), side(&mut rng), side(&mut rng));
        let p = 0.3 + 0.65 * unit(&mut rng);
        let mask = random_mask(dims, p, rng.next_u64());
        let spacing = if case % 4 == 3 { Spacing([1.0, 1.25, 2.0]) } else { Spacing::UNIT };
        let (fast, slow) = match (edt_fn(&mask, spacing), edt_brute_squared(&mask, spacing)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => return (case + 1, Some(format!("case {case}: {e}"))),
        };
        let exact = spacing == Spacing::UNIT;
        for (v, (a, b)) in fast.iter().zip(&slow).enumerate() {
            let ok = if exact { a == b } else { (a.sqrt() - b.sqrt()).abs() <= 1e-6 * b.sqrt().max(f64::MIN_POSITIVE) };
            if !ok {
                return (case + 1, Some(format!("case {case} ({dims}, {spacing:?}): voxel {v} gives {a}, oracle {b}")));
            }
        }
    }
    (cases, None)
}

/// Region masks partition the grid and match a direct indicator evaluation.
pub fn check_partition(cases: usize, seed: u64) -> (usize, Option<String>) {
    let mut rng = seeded_rng(seed);
    for case in 0..cases {
        let dims = Dims::new(6, 5, 4);
        let field = |rng: &mut _| {
            let vals = (0..dims.len()).map(|_| (RngCore::next_u64(rng) % 12) as f64 * 0.5).collect();
            DistanceField::from_values(dims, Spacing::UNIT, vals).unwrap()
        };
        let (da, db) = (field(&mut rng), field(&mut rng));
        let x = (rng.next_u64() % 12) as f64 * 0.5;
        let y = (rng.next_u64() % 12) as f64 * 0.5;
        let (t1, t2) = (x.min(y), x.max(y));
        let m = match build_region_masks(&da, &db, &Thresholds::explicit(t1, t2).unwrap()) {
            Ok(m) => m,
            Err(e) => return (case + 1, Some(e.to_string())),
        };
        for p in 0..dims.len() {
            let (a, b) = (da.values()[p], db.values()[p]);
            let r1 = a <= t1;
            let r2 = !r1 && t1 < b && b <= t2;
            let r3 = !r1 && !r2 && t1 < a && a <= t2;
            let r4 = !r1 && !r2 && !r3 && b > t2;
            let want = [r1, r2, r3, r4, !(r1 || r2 || r3 || r4)];
            let got = Region::ALL.map(|r| m.mask(r).bits()[p]);
            if got != want || got.iter().filter(|&&g| g).count() != 1 || want[4] != (a > t2 && b <= t1) {
                return (case + 1, Some(format!("case {case}: voxel {p} with ({a}, {b}), t = ({t1}, {t2})")));
            }
        }
    }
    (cases, None)
}

/// Mixing weights sum to one and the label stays between its parents.
pub fn check_alpha(cases: usize, seed: u64) -> (usize, Option<String>) {
    let mut rng = seeded_rng(seed);
    let label = |rng: &mut _| {
        let z: Vec<f64> = (0..3).map(|_| 6.0 * unit(rng) - 3.0).collect();
        SoftLabel::new(softmax(&z)).unwrap()
    };
    for case in 0..cases {
        let n = 1 + (rng.next_u64() % 64) as usize;
        let dims = Dims::new(n, 1, 1);
        let vals = |rng: &mut _| {
            let v = (0..n).map(|_| (RngCore::next_u64(rng) % 8) as f64).collect();
            DistanceField::from_values(dims, Spacing::UNIT, v).unwrap()
        };
        let (da, db) = (vals(&mut rng), vals(&mut rng));
        let m = build_region_masks(&da, &db, &Thresholds::explicit(2.0, 5.0).unwrap()).unwrap();
        let (ya, yb) = (label(&mut rng), label(&mut rng));
        let mix = match mix_labels(&ya, &yb, &m, CountDomain::All, &BinaryMask::filled(dims, true)) {
            Ok(mix) => mix,
            Err(_) if m.counts.residual == n => continue,
            Err(e) => return (case + 1, Some(e.to_string())),
        };
        let sum: f64 = mix.label.probs().iter().sum();
        let hull = mix
            .label
            .probs()
            .iter()
            .zip(ya.probs().iter().zip(yb.probs()))
            .all(|(&y, (&a, &b))| a.min(b) <= y && y <= a.max(b));
        if (mix.alpha_a + mix.alpha_b - 1.0).abs() > 1e-12 || (sum - 1.0).abs() > 1e-9 || !hull {
            return (case + 1, Some(format!("case {case}: alpha = ({}, {}), sum = {sum}", mix.alpha_a, mix.alpha_b)));
        }
        let same = mix_labels(&ya, &ya, &m, CountDomain::All, &BinaryMask::filled(dims, true)).unwrap();
        if same.label != ya {
            return (case + 1, Some(format!("case {case}: identity pair changed the label")));
        }
    }
    (cases, None)
}

/// Central finite differences of `soft_cross_entropy(softmax(z))`.
pub fn finite_difference_grad(z: &[f64], y: &SoftLabel, w: &ClassWeights, h: f64) -> Vec<f64> {
    (0..z.len())
        .map(|k| {
            let mut plus = z.to_vec();
            let mut minus = z.to_vec();
            plus[k] += h;
            minus[k] -= h;
            let lp = soft_cross_entropy(&softmax(&plus), y, w).unwrap();
            let lm = soft_cross_entropy(&softmax(&minus), y, w).unwrap();
            (lp - lm) / (2.0 * h)
        })
        .collect()
}

/// Analytic logit gradient against central finite differences.
pub fn check_gradient(cases: usize, seed: u64) -> (usize, Option<String>) {
    let mut rng = seeded_rng(seed);
    for case in 0..cases {
        let c = 2 + (rng.next_u64() % 4) as usize;
        let z: Vec<f64> = (0..c).map(|_| 8.0 * unit(&mut rng) - 4.0).collect();
        let t: Vec<f64> = (0..c).map(|_| 4.0 * unit(&mut rng) - 2.0).collect();
        let y = SoftLabel::new(softmax(&t)).unwrap();
        let w = ClassWeights::new((0..c).map(|_| 0.1 + 3.0 * unit(&mut rng)).collect()).unwrap();
        let analytic = soft_ce_grad_logits(&z, &y, &w).unwrap();
        let numeric = finite_difference_grad(&z, &y, &w, FD_STEP);
        for (k, (a, n)) in analytic.iter().zip(&numeric).enumerate() {
            let scale = a.abs().max(n.abs()).max(FD_SCALE_FLOOR);
            if (a - n).abs() > FD_REL_TOL * scale {
                return (case + 1, Some(format!("case {case}, class {k}: analytic {a}, numeric {n}")));
            }
        }
    }
    (cases, None)
}

/// Runs every group with the given EDT implementation.
pub fn run_with(edt_fn: SquaredEdtFn) -> Vec<GroupOutcome> {
    vec![
        timed("edt oracle", || check_edt(edt_fn, 60, 0x5eed_0001)),
        timed("mask partition", || check_partition(100, 0x5eed_0002)),
        timed("alpha conservation", || check_alpha(1000, 0x5eed_0003)),
        timed("loss gradient", || check_gradient(100, 0x5eed_0004)),
    ]
}

pub fn run() -> Vec<GroupOutcome> {
    run_with(edt_squared)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn healthy_build_passes() {
        for g in run() {
            assert!(g.passed(), "{}: {:?}", g.name, g.failure);
        }
    }

    fn off_by_one(fg: &BinaryMask, spacing: Spacing) -> Result<Vec<f64>> {
        let mut v = edt_squared(fg, spacing)?;
        if let Some(x) = v.iter_mut().find(|x| **x > 0.0) {
            *x += 1.0;
        }
        Ok(v)
    }

    #[test]
    fn corrupted_edt_is_reported() {
        let out = run_with(off_by_one);
        let failed: Vec<_> = out.iter().filter(|g| !g.passed()).map(|g| g.name).collect();
        assert_eq!(failed, vec!["edt oracle"]);
    }
}
