use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dtmix_core::io::{read_mix_records, read_nifti, write_nifti};
use dtmix_core::volume::foreground_mask;
use dtmix_core::{synth, Dims, Spacing, Volume};

fn dtmix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dtmix")).args(args).output().expect("spawn dtmix")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write(dir: &Path, name: &str, v: &Volume) -> PathBuf {
    let path = dir.join(name);
    write_nifti(&path, v).unwrap();
    path
}

#[test]
fn version_flag() {
    let out = dtmix(&["--version"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("0.1.0") && text.contains("mix-record format 1"), "{text}");
}

#[test]
fn edt_writes_distance_with_background_zero_set() {
    let dir = tempfile::tempdir().unwrap();
    let v = synth::ball(14, 5.0, "ball");
    let input = write(dir.path(), "ball.nii", &v);
    let output = dir.path().join("ball_dt.nii.gz");
    let out = dtmix(&["edt", "--input", p(&input), "--output", p(&output)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let dt = read_nifti(&output).unwrap();
    assert_eq!(dt.spacing(), v.spacing());
    let fg = foreground_mask(&v, 0.0);
    for (&d, &f) in dt.data().iter().zip(fg.bits()) {
        assert_eq!(d == 0.0, !f);
    }
}

#[test]
fn edt_usage_and_degenerate_exits() {
    let out = dtmix(&["edt", "--output", "x.nii"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));

    let dir = tempfile::tempdir().unwrap();
    let full = Volume::new(Dims::new(4, 4, 4), Spacing::UNIT, vec![2.0; 64], "full").unwrap();
    let input = write(dir.path(), "full.nii", &full);
    let out = dtmix(&["edt", "--input", p(&input), "--output", p(&dir.path().join("o.nii"))]);
    assert_eq!(code(&out), 5);
    assert!(String::from_utf8_lossy(&out.stderr).contains("EmptyBackground"));

    let out = dtmix(&["edt", "--input", p(&dir.path().join("missing.nii")), "--output", "o.nii"]);
    assert_eq!(code(&out), 3);
}

fn mix_args<'a>(a: &'a str, b: &'a str, img: &'a str, rec: &'a str) -> Vec<&'a str> {
    vec![
        "mix", "--input-a", a, "--input-b", b, "--label-a", "1", "--label-b", "2", "--num-classes", "3",
        "--out-image", img, "--out-record", rec,
    ]
}

#[test]
fn mix_identical_inputs_keeps_label() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.nii.gz", &synth::cube(12, 8, "a"));
    let (img, rec) = (dir.path().join("m.nii.gz"), dir.path().join("r.json"));
    let mut args = mix_args(p(&a), p(&a), p(&img), p(&rec));
    args[6] = "1";
    args[8] = "1";
    args.extend(["--t1", "1", "--t2", "2"]);
    let out = dtmix(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = &read_mix_records(&rec).unwrap()[0];
    assert_eq!(r.label.probs(), &[0.0, 1.0, 0.0]);
    assert_eq!((r.t1, r.t2), (1.0, 2.0));
    assert_eq!(r.seed, None);
    assert_eq!(read_nifti(&img).unwrap().dims(), Dims::new(12, 12, 12));
}

#[test]
fn mix_cube_ball_with_automatic_thresholds() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "cube.nii", &synth::cube(20, 10, "cube"));
    let b = write(dir.path(), "ball.nii", &synth::ball(20, 6.0, "ball"));
    let (img, rec) = (dir.path().join("m.nii"), dir.path().join("r.json"));
    let out = dtmix(&mix_args(p(&a), p(&b), p(&img), p(&rec)));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = &read_mix_records(&rec).unwrap()[0];
    assert_eq!((r.id_a.as_str(), r.id_b.as_str()), ("cube", "ball"));
    assert_eq!(r.counts.total(), 8000);
    r.check_consistency().unwrap();
}

#[test]
fn mix_shape_mismatch_names_both_shapes() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.nii", &synth::cube(8, 4, "a"));
    let b = write(dir.path(), "b.nii", &synth::cube(10, 4, "b"));
    let (img, rec) = (dir.path().join("m.nii"), dir.path().join("r.json"));
    let out = dtmix(&mix_args(p(&a), p(&b), p(&img), p(&rec)));
    assert_eq!(code(&out), 5);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("8x8x8") && err.contains("10x10x10"), "{err}");
}

#[test]
fn mix_identical_without_thresholds_is_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.nii", &synth::cube(12, 8, "a"));
    let (img, rec) = (dir.path().join("m.nii"), dir.path().join("r.json"));
    let out = dtmix(&mix_args(p(&a), p(&a), p(&img), p(&rec)));
    assert_eq!(code(&out), 4, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!rec.exists());
}

#[test]
fn mix_rejects_bad_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.nii", &synth::cube(8, 4, "a"));
    let (img, rec) = (dir.path().join("m.nii"), dir.path().join("r.json"));
    let mut args = mix_args(p(&a), p(&a), p(&img), p(&rec));
    args.extend(["--min-fraction", "0.3"]);
    assert_eq!(code(&dtmix(&args)), 2);
    let mut args = mix_args(p(&a), p(&a), p(&img), p(&rec));
    args.extend(["--t1", "1"]);
    assert_eq!(code(&dtmix(&args)), 2);
    let mut args = mix_args(p(&a), p(&a), p(&img), p(&rec));
    args[8] = "3";
    assert_eq!(code(&dtmix(&args)), 2);
}

#[test]
fn augment_needs_two_entries() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "a.nii", &synth::cube(8, 4, "a"));
    let manifest = dir.path().join("m.csv");
    std::fs::write(&manifest, "path,label\na.nii,0\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = dtmix(&["augment", "--manifest", p(&manifest), "--out-dir", p(&out_dir), "--seed", "1", "--pairs", "3"]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn augment_single_class_cross_class_is_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "a.nii", &synth::cube(12, 6, "a"));
    write(dir.path(), "b.nii", &synth::ball(12, 4.0, "b"));
    let manifest = dir.path().join("m.csv");
    std::fs::write(&manifest, "path,label\na.nii,1\nb.nii,1\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = dtmix(&[
        "augment", "--manifest", p(&manifest), "--out-dir", p(&out_dir), "--seed", "1", "--pairs", "2",
        "--pairing", "cross-class",
    ]);
    assert_eq!(code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stdout).contains("2 unpaired"));
}

#[test]
fn bench_small_grid_checks_oracle() {
    let out = dtmix(&["bench", "--size", "8,8,8", "--iters", "3"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("oracle: ok"), "{text}");
    let rows = text.lines().filter(|l| l.trim_start().starts_with(|c: char| c.is_ascii_digit())).count();
    assert_eq!(rows, 3);
    assert!(text.lines().any(|l| l.trim_start().starts_with("mean")));

    assert_eq!(code(&dtmix(&["bench", "--iters", "0"])), 2);
    assert_eq!(code(&dtmix(&["bench", "--size", "8,8"])), 2);
}

#[test]
fn selfcheck_passes() {
    let out = dtmix(&["selfcheck"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    for group in ["edt oracle", "mask partition", "alpha conservation", "loss gradient"] {
        assert!(text.contains(&format!("{group}: ok")), "{text}");
    }
}
