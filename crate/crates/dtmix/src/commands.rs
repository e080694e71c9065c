use std::time::Instant;

use dtmix_core::edt::{edt, edt_brute_squared, edt_squared};
use dtmix_core::io::{read_nifti, write_mix_record, write_nifti};
use dtmix_core::mixer::mix_pair_with_thresholds;
use dtmix_core::volume::foreground_mask;
use dtmix_core::{selfcheck, synth, Error, SoftLabel, Spacing, Thresholds};

use crate::args::{AugmentArgs, BenchArgs, EdtArgs, MixArgs};
use crate::augment::{self, AugmentPlan};
use crate::exit::{self, Failure};

/// Grids up to this many voxels are also checked against the brute-force transform.
pub const BENCH_ORACLE_MAX_VOXELS: usize = 16 * 16 * 16;

pub fn edt_cmd(args: &EdtArgs) -> Result<u8, Failure> {
    let v = read_nifti(&args.input)?;
    let spacing = args.spacing.unwrap_or(v.spacing());
    let fg = foreground_mask(&v, args.bg_threshold);
    let field = edt(&fg, spacing)?;
    let out = field.to_volume(v.id())?.with_orientation(v.orientation().copied());
    write_nifti(&args.output, &out)?;
    Ok(exit::OK)
}

pub fn mix_cmd(args: &MixArgs) -> Result<u8, Failure> {
    let cfg = args.config.to_config();
    cfg.validate()?;
    let ya = SoftLabel::one_hot(args.label_a, args.num_classes)?;
    let yb = SoftLabel::one_hot(args.label_b, args.num_classes)?;
    let thresholds = match (args.t1, args.t2) {
        (Some(t1), Some(t2)) => Some(Thresholds::explicit(t1, t2)?),
        _ => None,
    };
    let xa = read_nifti(&args.input_a)?;
    let xb = read_nifti(&args.input_b)?;
    let sample = mix_pair_with_thresholds(&xa, &ya, &xb, &yb, &cfg, thresholds).map_err(|e| match e {
        Error::ShapeMismatch { a, b } => Failure {
            code: exit::DEGENERATE,
            message: format!(
                "shape mismatch: {} is {a} but {} is {b}",
                args.input_a.display(),
                args.input_b.display()
            ),
        },
        other => other.into(),
    })?;
    write_nifti(&args.out_image, &sample.image)?;
    write_mix_record(&args.out_record, &sample.record)?;
    let r = &sample.record;
    println!(
        "t1 = {}, t2 = {}, P_a = {}, P_b = {}, alpha = ({}, {})",
        r.t1, r.t2, r.p_a, r.p_b, r.alpha_a, r.alpha_b
    );
    Ok(exit::OK)
}

pub fn augment_cmd(args: &AugmentArgs) -> Result<u8, Failure> {
    let plan = AugmentPlan {
        seed: args.seed,
        pairs: args.pairs,
        pairing: args.pairing.into(),
        workers: args.workers as usize,
        num_classes: args.num_classes,
        config: args.config.to_config(),
        out_dir: args.out_dir.clone(),
    };
    augment::run(&args.manifest, &plan)?;
    Ok(exit::OK)
}

pub fn bench_cmd(args: &BenchArgs) -> Result<u8, Failure> {
    let dims = args.size;
    let fg = synth::blob_mask(dims, args.seed);
    if fg.bits().iter().all(|&b| b) {
        return Err(Failure::usage(format!("size {dims} leaves no background")));
    }
    let voxels = dims.len() as f64;
    println!("edt on {dims} ({} voxels, {} foreground), single thread", dims.len(), fg.count());
    println!("{:>6}  {:>10}  {:>14}", "iter", "seconds", "voxels/s");
    let mut times = Vec::with_capacity(args.iters as usize);
    let mut last = Vec::new();
    for i in 1..=args.iters {
        let start = Instant::now();
        last = edt_squared(&fg, Spacing::UNIT)?;
        let secs = start.elapsed().as_secs_f64();
        times.push(secs);
        println!("{i:>6}  {secs:>10.4}  {:>14.4e}", voxels / secs);
    }
    let mean = times.iter().sum::<f64>() / times.len() as f64;
    let best = times.iter().copied().fold(f64::INFINITY, f64::min);
    println!("{:>6}  {mean:>10.4}  {:>14.4e}  (best {best:.4} s)", "mean", voxels / mean);

    if dims.len() <= BENCH_ORACLE_MAX_VOXELS {
        if edt_brute_squared(&fg, Spacing::UNIT)? == last {
            println!("oracle: ok");
        } else {
            println!("oracle: MISMATCH");
            return Ok(exit::SELFCHECK_FAILED);
        }
    }
    Ok(exit::OK)
}

pub fn selfcheck_cmd() -> Result<u8, Failure> {
    let groups = selfcheck::run();
    for g in &groups {
        match &g.failure {
            None => println!("{}: ok ({} cases, {:.2} s)", g.name, g.cases, g.seconds),
            Some(why) => println!("{}: FAIL ({why})", g.name),
        }
    }
    if groups.iter().all(|g| g.passed()) {
        Ok(exit::OK)
    } else {
        Ok(exit::SELFCHECK_FAILED)
    }
}
