use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Serialize, Serializer};

#[derive(Debug, Parser)]
#[command(name = "fractree", version, about = "Random tree Besov priors: sampling, MAP denoising and Monte Carlo checks")]
pub struct Cli {
    /// Worker threads for parallel work (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the blocks test signal and a noisy copy.
    GenerateBlocks(GenerateBlocksArgs),
    /// MAP-denoise a signal or image.
    Denoise(DenoiseArgs),
    /// Draw functions from the random tree prior.
    SamplePrior(SamplePriorArgs),
    /// Monte Carlo check of the branching process theory.
    Analyze(AnalyzeArgs),
    /// Compare a reconstruction against a reference.
    Metrics(MetricsArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SeedArg {
    #[arg(long, env = "FRACTREE_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateBlocksArgs {
    #[arg(long, default_value_t = 2048)]
    pub n: usize,
    /// sd(clean) / sd(noise); `inf` for no noise.
    #[arg(long, default_value = "3")]
    pub snr: Snr,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PriorName {
    Gauss,
    Laplace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WaveletName {
    Haar,
    Db2,
}

impl WaveletName {
    pub fn family(self) -> fractree::WaveletFamily {
        match self {
            WaveletName::Haar => fractree::WaveletFamily::haar(),
            WaveletName::Db2 => fractree::WaveletFamily::daubechies2(),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct DenoiseArgs {
    /// Signal (.csv), image (.pgm) or raw image (.f64 with --shape).
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, short)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0.25)]
    pub beta: f64,
    #[arg(long, value_enum, default_value_t = PriorName::Gauss)]
    pub prior: PriorName,
    /// Laplace threshold, in noise standard deviations.
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    /// Gaussian prior standard deviation, in noise standard deviations.
    /// At 1 kept coefficients are halved; values around 10 keep amplitudes.
    #[arg(long, default_value_t = 1.0)]
    pub prior_sigma: f64,
    /// Noise standard deviation, or `auto` for the median absolute deviation rule.
    #[arg(long, default_value = "auto")]
    pub sigma: NoiseArg,
    #[arg(long, value_enum, default_value_t = WaveletName::Haar)]
    pub wavelet: WaveletName,
    /// Dimensions of a raw input, e.g. `512x512`.
    #[arg(long)]
    pub shape: Option<Shape>,
}

#[derive(Debug, Clone, Args)]
pub struct SamplePriorArgs {
    #[arg(long, short = 'd', default_value_t = 1)]
    pub dim: u32,
    #[arg(long, default_value_t = 0.75)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    /// Finest level; defaults to 9 in 1D and 7 in 2D.
    #[arg(long)]
    pub jmax: Option<usize>,
    #[arg(long, value_enum, default_value_t = WaveletName::Haar)]
    pub wavelet: WaveletName,
    #[arg(long, default_value_t = 1)]
    pub samples: usize,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnalysisKind {
    Extinction,
    Dimension,
    NormGrowth,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    #[arg(value_enum)]
    pub kind: AnalysisKind,
    #[arg(long, short = 'd', default_value_t = 1)]
    pub dim: u32,
    #[arg(long, default_value_t = 0.75)]
    pub beta: f64,
    /// Depth of the simulated trees.
    #[arg(long, default_value_t = 20)]
    pub jmax: usize,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Norm growth: prior smoothness.
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    /// Norm growth: smoothness of the measured norm (default: critical).
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long, value_enum, default_value_t = WaveletName::Haar)]
    pub wavelet: WaveletName,
    /// Write the report here instead of stdout.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct MetricsArgs {
    #[arg(long)]
    pub reference: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    /// Peak value for PSNR and dynamic range for SSIM.
    #[arg(long, default_value_t = 1.0)]
    pub peak: f64,
    #[arg(long)]
    pub shape: Option<Shape>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Snr(pub f64);

impl FromStr for Snr {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v = match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" => f64::INFINITY,
            other => other.parse::<f64>().map_err(|e| format!("{s:?}: {e}"))?,
        };
        if v > 0.0 {
            Ok(Snr(v))
        } else {
            Err(format!("snr must be > 0, got {s}"))
        }
    }
}

impl Serialize for Snr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        crate::io::json_number(self.0).serialize(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseArg {
    Auto,
    Value(f64),
}

impl FromStr for NoiseArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(NoiseArg::Auto);
        }
        match s.parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Ok(NoiseArg::Value(v)),
            Ok(v) => Err(format!("noise sigma must be positive, got {v}")),
            Err(e) => Err(format!("{s:?}: expected `auto` or a number ({e})")),
        }
    }
}

impl Serialize for NoiseArg {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            NoiseArg::Auto => s.serialize_str("auto"),
            NoiseArg::Value(v) => s.serialize_f64(*v),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Shape {
    pub rows: usize,
    pub cols: usize,
}

impl FromStr for Shape {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (r, c) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("{s:?}: expected ROWSxCOLS"))?;
        let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{s:?}: {e}"));
        Ok(Shape {
            rows: parse(r)?,
            cols: parse(c)?,
        })
    }
}
