use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dtmix_core::mixer::{CountDomain, MixConfig, ResidualPolicy};
use dtmix_core::regions::{DEFAULT_MIN_FRACTION, DEFAULT_Q1, DEFAULT_Q2};
use dtmix_core::sampling::Pairing;
use dtmix_core::{Dims, Spacing};

pub const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (mix-record format 1)");

#[derive(Debug, Parser)]
#[command(name = "dtmix", version = VERSION, about = "Distance-transform guided mixup for 3D volumes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the Euclidean distance transform of a volume's foreground.
    Edt(EdtArgs),
    /// Mix one ordered pair of volumes.
    Mix(MixArgs),
    /// Generate a batch of mixed samples from a manifest.
    Augment(AugmentArgs),
    /// Time the distance transform on a synthetic mask.
    Bench(BenchArgs),
    /// Run the embedded invariant suite.
    Selfcheck,
}

#[derive(Debug, Args)]
pub struct EdtArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Intensities strictly above this are foreground.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub bg_threshold: f32,
    /// Override the voxel spacing from the header, in mm.
    #[arg(long, value_parser = parse_spacing)]
    pub spacing: Option<Spacing>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ResidualArg {
    Strict,
    FillA,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CountDomainArg {
    All,
    Foreground,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PairingArg {
    Uniform,
    CrossClass,
}

impl From<PairingArg> for Pairing {
    fn from(p: PairingArg) -> Self {
        match p {
            PairingArg::Uniform => Pairing::Uniform,
            PairingArg::CrossClass => Pairing::CrossClass,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct MixConfigArgs {
    /// Smallest share of the foreground union each region must hold.
    #[arg(long, default_value_t = DEFAULT_MIN_FRACTION)]
    pub min_fraction: f64,
    /// Voxels outside all four regions: zero (strict) or taken from input A.
    #[arg(long, value_enum, default_value_t = ResidualArg::Strict)]
    pub residual: ResidualArg,
    /// Voxels counted toward the label weights.
    #[arg(long, value_enum, default_value_t = CountDomainArg::All)]
    pub count_domain: CountDomainArg,
    /// Quantile of the pooled foreground distances used for t1.
    #[arg(long, default_value_t = DEFAULT_Q1)]
    pub q1: f64,
    /// Quantile used for t2.
    #[arg(long, default_value_t = DEFAULT_Q2)]
    pub q2: f64,
    /// Intensities strictly above this are foreground.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub bg_threshold: f32,
}

impl MixConfigArgs {
    pub fn to_config(&self) -> MixConfig {
        MixConfig {
            residual_policy: match self.residual {
                ResidualArg::Strict => ResidualPolicy::Strict,
                ResidualArg::FillA => ResidualPolicy::FillA,
            },
            count_domain: match self.count_domain {
                CountDomainArg::All => CountDomain::All,
                CountDomainArg::Foreground => CountDomain::Foreground,
            },
            min_fraction: self.min_fraction,
            bg_threshold: self.bg_threshold,
            q1: self.q1,
            q2: self.q2,
        }
    }
}

#[derive(Debug, Args)]
pub struct MixArgs {
    #[arg(long)]
    pub input_a: PathBuf,
    #[arg(long)]
    pub input_b: PathBuf,
    /// Class index of input A.
    #[arg(long)]
    pub label_a: usize,
    /// Class index of input B.
    #[arg(long)]
    pub label_b: usize,
    #[arg(long, default_value_t = 3)]
    pub num_classes: usize,
    #[arg(long)]
    pub out_image: PathBuf,
    /// JSON sidecar with thresholds, region counts and the mixed label.
    #[arg(long)]
    pub out_record: PathBuf,
    /// Fixed thresholds in mm; skips the quantile search. Needs --t2.
    #[arg(long, requires = "t2")]
    pub t1: Option<f64>,
    #[arg(long, requires = "t1")]
    pub t2: Option<f64>,
    #[command(flatten)]
    pub config: MixConfigArgs,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    /// CSV with header `path,label` or `path,label,id`.
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub seed: u64,
    /// Number of pairs to draw.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub pairs: u64,
    /// cross-class redraws the pair, up to 100 times, until the classes differ.
    #[arg(long, value_enum, default_value_t = PairingArg::Uniform)]
    pub pairing: PairingArg,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub workers: u32,
    #[arg(long, default_value_t = 3)]
    pub num_classes: usize,
    #[command(flatten)]
    pub config: MixConfigArgs,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Grid size as nx,ny,nz.
    #[arg(long, default_value = "181,217,181", value_parser = parse_dims)]
    pub size: Dims,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
    pub iters: u32,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

fn parse_triple<T: FromStr>(s: &str) -> Result<[T; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated values, got `{s}`"));
    }
    let mut out = Vec::with_capacity(3);
    for p in parts {
        out.push(p.parse::<T>().map_err(|_| format!("`{p}` is not a valid number"))?);
    }
    out.try_into().map_err(|_| unreachable!())
}

pub fn parse_dims(s: &str) -> Result<Dims, String> {
    let [nx, ny, nz] = parse_triple::<usize>(s)?;
    if nx == 0 || ny == 0 || nz == 0 {
        return Err(format!("every dimension must be positive, got `{s}`"));
    }
    Ok(Dims::new(nx, ny, nz))
}

pub fn parse_spacing(s: &str) -> Result<Spacing, String> {
    let [x, y, z] = parse_triple::<f64>(s)?;
    Spacing::new(x, y, z).map_err(|e| e.to_string())
}
