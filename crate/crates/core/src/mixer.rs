//! Region-wise composition of a volume pair and its pixel-count soft label.

use serde::{Deserialize, Serialize};

use crate::edt::{edt, DistanceField};
use crate::error::{Error, Result};
use crate::regions::{
    build_region_masks, check_min_fraction, select_thresholds, RegionCounts, RegionMasks, Thresholds,
    DEFAULT_MIN_FRACTION, DEFAULT_Q1, DEFAULT_Q2,
};
use crate::volume::{foreground_mask, validate_pair, BinaryMask, Volume, DEFAULT_BG_THRESHOLD};

/// Tolerance on the component sum of an input label.
pub const LABEL_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SoftLabel(Vec<f64>);

impl SoftLabel {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidLabel("label has no classes".into()));
        }
        if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidLabel(format!("component {p} outside [0, 1]")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > LABEL_SUM_TOL {
            return Err(Error::InvalidLabel(format!("components sum to {sum}, expected 1")));
        }
        Ok(SoftLabel(probs))
    }

    pub fn one_hot(class: usize, num_classes: usize) -> Result<Self> {
        if class >= num_classes {
            return Err(Error::InvalidLabel(format!("class {class} out of range for {num_classes} classes")));
        }
        let mut probs = vec![0.0; num_classes];
        probs[class] = 1.0;
        Ok(SoftLabel(probs))
    }

    pub fn num_classes(&self) -> usize {
        self.0.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualPolicy {
    /// Residual voxels become zero.
    #[default]
    Strict,
    /// Residual voxels take the value of `xa`.
    FillA,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountDomain {
    /// Count every voxel of each region.
    #[default]
    All,
    /// Count only voxels inside the foreground union.
    Foreground,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixConfig {
    pub residual_policy: ResidualPolicy,
    pub count_domain: CountDomain,
    pub min_fraction: f64,
    pub bg_threshold: f32,
    pub q1: f64,
    pub q2: f64,
}

impl Default for MixConfig {
    fn default() -> Self {
        Self {
            residual_policy: ResidualPolicy::Strict,
            count_domain: CountDomain::All,
            min_fraction: DEFAULT_MIN_FRACTION,
            bg_threshold: DEFAULT_BG_THRESHOLD,
            q1: DEFAULT_Q1,
            q2: DEFAULT_Q2,
        }
    }
}

impl MixConfig {
    pub fn validate(&self) -> Result<()> {
        check_min_fraction(self.min_fraction)?;
        if !(0.0 < self.q1 && self.q1 < self.q2 && self.q2 < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "quantiles must satisfy 0 < q1 < q2 < 1, got {}, {}",
                self.q1, self.q2
            )));
        }
        if !self.bg_threshold.is_finite() {
            return Err(Error::InvalidParameter("bg_threshold must be finite".into()));
        }
        Ok(())
    }
}

/// Provenance of one mixed sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixRecord {
    pub id_a: String,
    pub id_b: String,
    pub t1: f64,
    pub t2: f64,
    pub counts: RegionCounts,
    pub p_a: usize,
    pub p_b: usize,
    pub alpha_a: f64,
    pub alpha_b: f64,
    pub label: SoftLabel,
    pub config: MixConfig,
    pub seed: Option<u64>,
    pub pair_index: Option<u64>,
}

impl MixRecord {
    /// Checks the record's internal bookkeeping.
    pub fn check_consistency(&self) -> Result<()> {
        let c = &self.counts;
        let (full_a, full_b) = (c.r1 + c.r3, c.r2 + c.r4);
        let bad = match self.config.count_domain {
            CountDomain::All => self.p_a != full_a || self.p_b != full_b,
            CountDomain::Foreground => self.p_a > full_a || self.p_b > full_b,
        };
        if bad {
            return Err(Error::InconsistentRecord(format!(
                "p_a = {}, p_b = {} do not match counts r1 + r3 = {full_a}, r2 + r4 = {full_b}",
                self.p_a, self.p_b
            )));
        }
        if (self.alpha_a + self.alpha_b - 1.0).abs() > 1e-12 {
            return Err(Error::InconsistentRecord(format!(
                "alpha_a + alpha_b = {}",
                self.alpha_a + self.alpha_b
            )));
        }
        if self.t1.partial_cmp(&self.t2).is_none_or(|o| o.is_gt()) {
            return Err(Error::InconsistentRecord(format!("t1 = {} > t2 = {}", self.t1, self.t2)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixedSample {
    pub image: Volume,
    pub label: SoftLabel,
    pub record: MixRecord,
}

/// Soft label of a mix with its pixel counts and weights.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMix {
    pub label: SoftLabel,
    pub p_a: usize,
    pub p_b: usize,
    pub alpha_a: f64,
    pub alpha_b: f64,
}

/// Takes R1 and R3 voxels from `xa`, R2 and R4 voxels from `xb`.
pub fn mix_images(xa: &Volume, xb: &Volume, m: &RegionMasks, policy: ResidualPolicy) -> Result<Volume> {
    validate_pair(xa, xb)?;
    if m.dims() != xa.dims() {
        return Err(Error::DimsMismatch { a: xa.dims(), b: m.dims() });
    }
    let from_a = m.r1.bits().iter().zip(m.r3.bits()).map(|(&r1, &r3)| r1 || r3);
    let from_b = m.r2.bits().iter().zip(m.r4.bits()).map(|(&r2, &r4)| r2 || r4);
    let data = xa
        .data()
        .iter()
        .zip(xb.data())
        .zip(from_a.zip(from_b))
        .map(|((&a, &b), (take_a, take_b))| match (take_a, take_b) {
            (true, _) => a,
            (_, true) => b,
            _ => match policy {
                ResidualPolicy::Strict => 0.0,
                ResidualPolicy::FillA => a,
            },
        })
        .collect();
    let id = format!("{}+{}", xa.id(), xb.id());
    Ok(Volume::new(xa.dims(), xa.spacing(), data, id)?.with_orientation(xa.orientation().copied()))
}

/// Pixel-count weights and the resulting soft label.
///
/// `fg_union` is only consulted when `domain` is [`CountDomain::Foreground`].
pub fn mix_labels(
    ya: &SoftLabel,
    yb: &SoftLabel,
    m: &RegionMasks,
    domain: CountDomain,
    fg_union: &BinaryMask,
) -> Result<LabelMix> {
    if ya.num_classes() != yb.num_classes() {
        return Err(Error::ClassCountMismatch(ya.num_classes(), yb.num_classes()));
    }
    for y in [ya, yb] {
        let sum: f64 = y.probs().iter().sum();
        if (sum - 1.0).abs() > LABEL_SUM_TOL {
            return Err(Error::InvalidLabel(format!("components sum to {sum}, expected 1")));
        }
    }
    let counts = match domain {
        CountDomain::All => m.counts,
        CountDomain::Foreground => m.counts_within(fg_union)?,
    };
    let p_a = counts.r1 + counts.r3;
    let p_b = counts.r2 + counts.r4;
    if p_a + p_b == 0 {
        return Err(Error::DegenerateMix);
    }
    let total = (p_a + p_b) as f64;
    let alpha_a = p_a as f64 / total;
    let alpha_b = p_b as f64 / total;
    // clamp to the segment [ya_i, yb_i] to absorb the last-bit rounding of the sum
    let probs = ya
        .probs()
        .iter()
        .zip(yb.probs())
        .map(|(&a, &b)| (alpha_a * a + alpha_b * b).clamp(a.min(b), a.max(b)))
        .collect();
    Ok(LabelMix { label: SoftLabel(probs), p_a, p_b, alpha_a, alpha_b })
}

/// Intermediate products of [`mix_pair`], exposed for inspection tools.
#[derive(Debug, Clone)]
pub struct PairAnalysis {
    pub fg_a: BinaryMask,
    pub fg_b: BinaryMask,
    pub da: DistanceField,
    pub db: DistanceField,
    pub thresholds: Thresholds,
    pub masks: RegionMasks,
}

/// Foreground masks, distance fields, thresholds and region masks of a pair.
/// Explicit `thresholds` skip the quantile search.
pub fn analyze_pair(xa: &Volume, xb: &Volume, cfg: &MixConfig, thresholds: Option<Thresholds>) -> Result<PairAnalysis> {
    cfg.validate()?;
    validate_pair(xa, xb)?;
    let fg_a = foreground_mask(xa, cfg.bg_threshold);
    let fg_b = foreground_mask(xb, cfg.bg_threshold);
    let da = edt(&fg_a, xa.spacing())?;
    let db = edt(&fg_b, xb.spacing())?;
    let thresholds = match thresholds {
        Some(t) => {
            t.validate()?;
            t
        }
        None => select_thresholds(&da, &db, &fg_a, &fg_b, cfg.min_fraction, cfg.q1, cfg.q2)?,
    };
    let masks = build_region_masks(&da, &db, &thresholds)?;
    Ok(PairAnalysis { fg_a, fg_b, da, db, thresholds, masks })
}

/// Full pipeline for one ordered pair; `xa` always plays the role of the first source.
pub fn mix_pair(xa: &Volume, ya: &SoftLabel, xb: &Volume, yb: &SoftLabel, cfg: &MixConfig) -> Result<MixedSample> {
    mix_pair_with_thresholds(xa, ya, xb, yb, cfg, None)
}

pub fn mix_pair_with_thresholds(
    xa: &Volume,
    ya: &SoftLabel,
    xb: &Volume,
    yb: &SoftLabel,
    cfg: &MixConfig,
    thresholds: Option<Thresholds>,
) -> Result<MixedSample> {
    if ya.num_classes() != yb.num_classes() {
        return Err(Error::ClassCountMismatch(ya.num_classes(), yb.num_classes()));
    }
    let analysis = analyze_pair(xa, xb, cfg, thresholds)?;
    let image = mix_images(xa, xb, &analysis.masks, cfg.residual_policy)?;
    let fg_union = analysis.fg_a.union(&analysis.fg_b)?;
    let mix = mix_labels(ya, yb, &analysis.masks, cfg.count_domain, &fg_union)?;
    let record = MixRecord {
        id_a: xa.id().to_string(),
        id_b: xb.id().to_string(),
        t1: analysis.thresholds.t1,
        t2: analysis.thresholds.t2,
        counts: analysis.masks.counts,
        p_a: mix.p_a,
        p_b: mix.p_b,
        alpha_a: mix.alpha_a,
        alpha_b: mix.alpha_b,
        label: mix.label.clone(),
        config: *cfg,
        seed: None,
        pair_index: None,
    };
    Ok(MixedSample { image, label: mix.label, record })
}
