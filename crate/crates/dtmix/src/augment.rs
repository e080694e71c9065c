//! Seeded batch augmentation over a manifest.
//!
//! Every pair index draws from its own generator, so the outputs depend only
//! on the manifest, seed, pair count and mixing config, never on the number
//! of workers. Records are collected in pair order and written once at the end.

use std::fs;
use std::path::{Path, PathBuf};

use dtmix_core::io::{encode_mix_record, read_manifest, read_nifti, write_nifti, ManifestEntry};
use dtmix_core::mixer::{mix_pair, MixConfig, MixRecord};
use dtmix_core::sampling::{pair_rng, sample_pair, Pairing};
use dtmix_core::{Error, ErrorKind, SoftLabel};
use rayon::prelude::*;
use serde_json::json;

use crate::exit::{self, Failure};

pub const RECORDS_FILE: &str = "records.jsonl";
pub const PLAN_FILE: &str = "plan.json";

#[derive(Debug, Clone)]
pub struct AugmentPlan {
    pub seed: u64,
    pub pairs: u64,
    pub pairing: Pairing,
    pub workers: usize,
    pub num_classes: usize,
    pub config: MixConfig,
    pub out_dir: PathBuf,
}

#[derive(Debug)]
enum PairOutcome {
    Written(Box<MixRecord>),
    NoPartner,
    Infeasible(String),
    Degenerate(String),
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct Summary {
    pub written: u64,
    pub infeasible: u64,
    pub degenerate: u64,
    pub unpaired: u64,
}

pub fn image_name(k: u64) -> String {
    format!("mix_{k:06}.nii.gz")
}

fn run_pair(k: u64, entries: &[ManifestEntry], labels: &[usize], plan: &AugmentPlan) -> Result<PairOutcome, Error> {
    let mut rng = pair_rng(plan.seed, k);
    let Some((a, b)) = sample_pair(&mut rng, labels, plan.pairing) else {
        return Ok(PairOutcome::NoPartner);
    };
    let (ea, eb) = (&entries[a], &entries[b]);
    let xa = read_nifti(&ea.path)?.with_id(ea.id.clone());
    let xb = read_nifti(&eb.path)?.with_id(eb.id.clone());
    let ya = SoftLabel::one_hot(ea.label, plan.num_classes)?;
    let yb = SoftLabel::one_hot(eb.label, plan.num_classes)?;
    let sample = match mix_pair(&xa, &ya, &xb, &yb, &plan.config) {
        Ok(s) => s,
        Err(e) => {
            let msg = format!("pair {k} ({} x {}): {e}", ea.id, eb.id);
            return match e.kind() {
                ErrorKind::Infeasible => Ok(PairOutcome::Infeasible(msg)),
                ErrorKind::Degenerate => Ok(PairOutcome::Degenerate(msg)),
                _ => Err(e),
            };
        }
    };
    write_nifti(plan.out_dir.join(image_name(k)), &sample.image)?;
    let mut record = sample.record;
    record.seed = Some(plan.seed);
    record.pair_index = Some(k);
    Ok(PairOutcome::Written(Box::new(record)))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure { code: exit::IO, message: format!("{}: {e}", path.display()) })
}

pub fn run(manifest: &Path, plan: &AugmentPlan) -> Result<Summary, Failure> {
    plan.config.validate()?;
    let entries = read_manifest(manifest, plan.num_classes)?;
    if entries.len() < 2 {
        return Err(Failure::usage(format!(
            "manifest {} has {} entry; at least two are needed to form a pair",
            manifest.display(),
            entries.len()
        )));
    }
    let labels: Vec<usize> = entries.iter().map(|e| e.label).collect();
    fs::create_dir_all(&plan.out_dir)
        .map_err(|e| Failure { code: exit::IO, message: format!("{}: {e}", plan.out_dir.display()) })?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.workers)
        .build()
        .map_err(|e| Failure::usage(format!("cannot start {} workers: {e}", plan.workers)))?;
    let outcomes: Vec<Result<PairOutcome, Error>> =
        pool.install(|| (0..plan.pairs).into_par_iter().map(|k| run_pair(k, &entries, &labels, plan)).collect());

    let mut summary = Summary::default();
    let mut lines = String::new();
    for (k, outcome) in outcomes.into_iter().enumerate() {
        match outcome? {
            PairOutcome::Written(r) => {
                summary.written += 1;
                lines.push_str(&encode_mix_record(&r)?);
                lines.push('\n');
            }
            PairOutcome::NoPartner => {
                summary.unpaired += 1;
                eprintln!("warning: pair {k}: no cross-class partner found, skipped");
            }
            PairOutcome::Infeasible(msg) => {
                summary.infeasible += 1;
                eprintln!("warning: {msg}, skipped");
            }
            PairOutcome::Degenerate(msg) => {
                summary.degenerate += 1;
                eprintln!("warning: {msg}, skipped");
            }
        }
    }
    write_file(&plan.out_dir.join(RECORDS_FILE), &lines)?;

    let plan_json = json!({
        "seed": plan.seed,
        "pairs": plan.pairs,
        "pairing": plan.pairing.as_str(),
        "num_classes": plan.num_classes,
        "config": plan.config,
        "written": summary.written,
        "skipped": {
            "infeasible": summary.infeasible,
            "degenerate": summary.degenerate,
            "unpaired": summary.unpaired,
        },
    });
    let mut text = serde_json::to_string_pretty(&plan_json).map_err(Error::from)?;
    text.push('\n');
    write_file(&plan.out_dir.join(PLAN_FILE), &text)?;

    println!(
        "augment: {} written, {} infeasible, {} degenerate, {} unpaired",
        summary.written, summary.infeasible, summary.degenerate, summary.unpaired
    );
    if summary.written == 0 {
        let code = if summary.infeasible > 0 || summary.unpaired > 0 { exit::INFEASIBLE } else { exit::DEGENERATE };
        return Err(Failure { code, message: "no pair could be mixed".into() });
    }
    Ok(summary)
}
