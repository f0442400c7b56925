use std::path::{Path, PathBuf};

use fractree::analysis::{l2_error, mc_dimension, mc_extinction, mc_norm_growth, mse, psnr, rmse, ssim};
use fractree::fixtures::{blocks, std_dev};
use fractree::map_denoise::{denoise_any_size, DenoiseConfig, NoiseLevel, PriorKind};
use fractree::prior::{sample_prior_draw, PriorParams};
use fractree::rng::{derive_seed, rng_from_seed};
use fractree::{Dim, Field};
use rand_distr::{Distribution, Normal};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{
    AnalysisKind, AnalyzeArgs, Cli, Command, DenoiseArgs, GenerateBlocksArgs, MetricsArgs, NoiseArg, PriorName,
    SamplePriorArgs, Shape, Snr, WaveletName,
};
use crate::error::{CliError, CliResult};
use crate::io::{self, json_number};

/// Everything needed to rerun a command; embedded in every report.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RunConfig {
    pub subcommand: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub inputs: Vec<PathBuf>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub outputs: Vec<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<AnalysisKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr: Option<Snr>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prior: Option<PriorName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prior_sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_noise: Option<NoiseArg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wavelet: Option<WaveletName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub peak: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shape: Option<Shape>,
}

/// Runs a parsed command line. Returns a report to print on stdout, if the
/// command does not write one to a file.
pub fn run(cli: Cli) -> CliResult<Option<Value>> {
    match cli.threads {
        Some(0) => Err(CliError::Param("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Param(format!("thread pool: {e}")))?
            .install(|| dispatch(cli.command)),
        None => dispatch(cli.command),
    }
}

fn dispatch(command: Command) -> CliResult<Option<Value>> {
    match command {
        Command::GenerateBlocks(a) => cmd_generate_blocks(&a).map(|_| None),
        Command::Denoise(a) => cmd_denoise(&a).map(|_| None),
        Command::SamplePrior(a) => cmd_sample_prior(&a).map(|_| None),
        Command::Analyze(a) => emit(cmd_analyze(&a)?, a.out.as_deref()),
        Command::Metrics(a) => emit(cmd_metrics(&a)?, a.out.as_deref()),
    }
}

fn emit(report: Value, out: Option<&Path>) -> CliResult<Option<Value>> {
    match out {
        Some(path) => {
            io::write_json(path, &report)?;
            Ok(None)
        }
        None => Ok(Some(report)),
    }
}

fn dim_from(d: u32) -> CliResult<Dim> {
    Dim::from_d(d).map_err(|_| CliError::Param(format!("dimension must be 1 or 2, got {d}")))
}

/// Writes `clean.csv`, `noisy.csv` and `report.json` into `args.out`.
/// Noise is `N(0, sigma^2)` with `sigma = sd(clean) / snr`.
pub fn cmd_generate_blocks(args: &GenerateBlocksArgs) -> CliResult<Value> {
    if args.n < 2 {
        return Err(CliError::Param(format!("n must be at least 2, got {}", args.n)));
    }
    let clean = blocks(args.n);
    let clean_sd = std_dev(&clean);
    let sigma = clean_sd / args.snr.0;
    let noisy: Vec<f64> = if sigma == 0.0 {
        clean.clone()
    } else {
        let normal = Normal::new(0.0, sigma).map_err(|e| CliError::Param(e.to_string()))?;
        let mut rng = rng_from_seed(args.seed.seed);
        clean.iter().map(|v| v + normal.sample(&mut rng)).collect()
    };
    let noise: Vec<f64> = noisy.iter().zip(&clean).map(|(y, x)| y - x).collect();

    io::ensure_dir(&args.out)?;
    let clean_path = args.out.join("clean.csv");
    let noisy_path = args.out.join("noisy.csv");
    io::write_csv(&clean_path, &clean)?;
    io::write_csv(&noisy_path, &noisy)?;
    let config = RunConfig {
        subcommand: "generate-blocks".into(),
        outputs: vec![clean_path, noisy_path],
        n: Some(args.n),
        snr: Some(args.snr),
        seed: Some(args.seed.seed),
        ..Default::default()
    };
    let report = json!({
        "config": config,
        "clean_sd": clean_sd,
        "noise_sigma": sigma,
        "empirical_noise_sd": std_dev(&noise),
        "empirical_noise_ratio": std_dev(&noise) / clean_sd,
    });
    io::write_json(&args.out.join("report.json"), &report)?;
    Ok(report)
}

/// Writes the reconstruction (`reconstruction.csv`, or `.pgm` plus the
/// lossless `.f64`), the selected tree `tree.json`, and `report.json`.
pub fn cmd_denoise(args: &DenoiseArgs) -> CliResult<Value> {
    let shape = args.shape.map(|s| (s.rows, s.cols));
    let input = io::read_field(&args.input, shape)?;
    let prior = match args.prior {
        PriorName::Gauss => PriorKind::Gauss {
            sigma: args.prior_sigma,
        },
        PriorName::Laplace => PriorKind::Laplace { a: args.a },
    };
    let config = DenoiseConfig::new(args.beta, prior, args.wavelet.family(), input.dim())
        .map_err(|e| CliError::Param(e.to_string()))?;
    let noise = match args.sigma {
        NoiseArg::Auto => NoiseLevel::Auto,
        NoiseArg::Value(v) => NoiseLevel::Known(v),
    };
    let result = denoise_any_size(&input, &config, noise)?;

    io::ensure_dir(&args.out)?;
    let mut outputs = io::write_field(&args.out, "reconstruction", &result.reconstruction)?;
    let tree_path = args.out.join("tree.json");
    io::write_json(&tree_path, &result.mask)?;
    outputs.push(tree_path);

    let shape = match &result.reconstruction {
        Field::Signal(x) => json!({ "len": x.len() }),
        Field::Image(im) => json!({ "rows": im.rows(), "cols": im.cols() }),
    };
    let config = RunConfig {
        subcommand: "denoise".into(),
        inputs: vec![args.input.clone()],
        outputs,
        d: Some(input.dim().d()),
        beta: Some(args.beta),
        prior: Some(args.prior),
        a: (args.prior == PriorName::Laplace).then_some(args.a),
        prior_sigma: (args.prior == PriorName::Gauss).then_some(args.prior_sigma),
        sigma_noise: Some(args.sigma),
        j_max: Some(result.mask.j_max()),
        wavelet: Some(args.wavelet),
        shape: args.shape,
        ..Default::default()
    };
    let report = json!({
        "config": config,
        "shape": shape,
        "noise_sigma": result.noise_sigma,
        "objective": result.objective,
        "kept_nodes": result.mask.count(),
        "level_counts": result.mask.level_counts()?,
    });
    io::write_json(&args.out.join("report.json"), &report)?;
    Ok(report)
}

/// Draw `i` uses seed `derive_seed(seed, i)` and is written as
/// `draw_<i>.csv` (1D) or `draw_<i>.pgm` scaled to its own range plus
/// `draw_<i>.f64` (2D), with its tree in `tree_<i>.json`.
pub fn cmd_sample_prior(args: &SamplePriorArgs) -> CliResult<Value> {
    let dim = dim_from(args.dim)?;
    if args.samples == 0 {
        return Err(CliError::Param("--samples must be at least 1".into()));
    }
    let j_max = args.jmax.unwrap_or_else(|| PriorParams::default_j_max(dim));
    let params = PriorParams::new(args.s, args.p, args.kappa, args.beta, dim, args.wavelet.family(), j_max)
        .map_err(|e| CliError::Param(e.to_string()))?;

    io::ensure_dir(&args.out)?;
    let mut outputs = Vec::new();
    let mut draws = Vec::new();
    for i in 0..args.samples {
        let seed = derive_seed(args.seed.seed, i as u64);
        let draw = sample_prior_draw(&params, seed)?;
        let values = draw.field.values();
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let stem = format!("draw_{i:03}");
        match &draw.field {
            Field::Signal(x) => {
                let path = args.out.join(format!("{stem}.csv"));
                io::write_csv(&path, x)?;
                outputs.push(path);
            }
            Field::Image(im) => {
                let pgm = args.out.join(format!("{stem}.pgm"));
                let raw = args.out.join(format!("{stem}.f64"));
                io::write_pgm(&pgm, im, lo, hi)?;
                io::write_raw_f64(&raw, im.data())?;
                outputs.extend([pgm, raw]);
            }
        }
        let tree_path = args.out.join(format!("tree_{i:03}.json"));
        io::write_json(&tree_path, &draw.mask)?;
        outputs.push(tree_path);
        draws.push(json!({
            "index": i,
            "seed": seed,
            "min": lo,
            "max": hi,
            "kept_nodes": draw.mask.count(),
            "level_counts": draw.mask.level_counts()?,
        }));
    }
    let config = RunConfig {
        subcommand: "sample-prior".into(),
        outputs,
        d: Some(args.dim),
        beta: Some(args.beta),
        s: Some(args.s),
        p: Some(args.p),
        kappa: Some(args.kappa),
        j_max: Some(j_max),
        n_samples: Some(args.samples),
        seed: Some(args.seed.seed),
        wavelet: Some(args.wavelet),
        ..Default::default()
    };
    let side = 1usize << (j_max + 1);
    let shape = match dim {
        Dim::One => json!({ "len": side }),
        Dim::Two => json!({ "rows": side, "cols": side }),
    };
    let report = json!({
        "config": config,
        "shape": shape,
        "critical_smoothness": params.critical_smoothness(),
        "draws": draws,
    });
    io::write_json(&args.out.join("report.json"), &report)?;
    Ok(report)
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> CliResult<Value> {
    let dim = dim_from(args.dim)?;
    let seed = args.seed.seed;
    let mut config = RunConfig {
        subcommand: "analyze".into(),
        outputs: args.out.iter().cloned().collect(),
        kind: Some(args.kind),
        d: Some(args.dim),
        beta: Some(args.beta),
        j_max: Some(args.jmax),
        n_samples: Some(args.samples),
        seed: Some(seed),
        ..Default::default()
    };
    let report = match args.kind {
        AnalysisKind::Extinction => mc_extinction(dim, args.beta, args.jmax, args.samples, seed)?,
        AnalysisKind::Dimension => mc_dimension(dim, args.beta, args.jmax, args.samples, seed)?,
        AnalysisKind::NormGrowth => {
            let params = PriorParams::new(args.s, args.p, args.kappa, args.beta, dim, args.wavelet.family(), args.jmax)
                .map_err(|e| CliError::Param(e.to_string()))?;
            let t = args.t.unwrap_or_else(|| params.critical_smoothness());
            config.s = Some(args.s);
            config.p = Some(args.p);
            config.kappa = Some(args.kappa);
            config.t = Some(t);
            config.wavelet = Some(args.wavelet);
            mc_norm_growth(&params, t, args.jmax, args.samples, seed)?
        }
    };
    Ok(json!({ "config": config, "result": report }))
}

fn same_shape(a: &Field, b: &Field) -> bool {
    match (a, b) {
        (Field::Signal(x), Field::Signal(y)) => x.len() == y.len(),
        (Field::Image(x), Field::Image(y)) => x.rows() == y.rows() && x.cols() == y.cols(),
        _ => false,
    }
}

/// l2 error, (R)MSE, PSNR against `peak`, and SSIM for images.
pub fn cmd_metrics(args: &MetricsArgs) -> CliResult<Value> {
    if !(args.peak > 0.0) {
        return Err(CliError::Param(format!("--peak must be > 0, got {}", args.peak)));
    }
    let shape = args.shape.map(|s| (s.rows, s.cols));
    let reference = io::read_field(&args.reference, shape)?;
    let test = io::read_field(&args.test, shape)?;
    if !same_shape(&reference, &test) {
        return Err(CliError::Param("reference and test differ in shape".into()));
    }
    let (x, y) = (reference.values(), test.values());
    let ssim_value = match (&reference, &test) {
        (Field::Image(a), Field::Image(b)) if a.rows().min(a.cols()) >= fractree::analysis::SSIM_WINDOW => {
            Some(ssim(a, b, args.peak)?)
        }
        _ => None,
    };
    let config = RunConfig {
        subcommand: "metrics".into(),
        inputs: vec![args.reference.clone(), args.test.clone()],
        outputs: args.out.iter().cloned().collect(),
        peak: Some(args.peak),
        shape: args.shape,
        ..Default::default()
    };
    Ok(json!({
        "config": config,
        "n": x.len(),
        "l2": l2_error(x, y)?,
        "mse": mse(x, y)?,
        "rmse": rmse(x, y)?,
        "psnr": json_number(psnr(x, y, args.peak)?),
        "ssim": ssim_value,
    }))
}

