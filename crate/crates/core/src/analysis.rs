//! Monte Carlo checks of the random tree theory, and reconstruction metrics.
//!
//! Every Monte Carlo routine draws sample `i` from the stream
//! `derive_seed(seed, i)` and aggregates in index order, so reports are
//! reproducible and independent of the worker count.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::prior::{truncated_norm_profile, PriorParams};
use crate::rng::{derive_seed, rng_from_seed};
use crate::tree::{extinction_probability, sample_level_counts, Dim, SubtreeMask};
use crate::wavelet::Image;

/// Mean and standard error of one per-level quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelStat {
    pub level: usize,
    pub mean: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub operation: String,
    pub config: serde_json::Value,
    pub n_samples: usize,
    /// Samples the estimate is averaged over (e.g. surviving trees).
    pub n_effective: usize,
    /// `None` when there is nothing to estimate from (e.g. every tree died).
    pub estimate: Option<f64>,
    pub std_error: f64,
    pub theory_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<LevelStat>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub diagnostics: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

/// Running mean / variance.
#[derive(Debug, Default, Clone, Copy)]
struct Moments {
    n: usize,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }

    /// Standard error of the mean from the unbiased sample variance.
    fn std_error(&self) -> f64 {
        if self.n < 2 {
            return f64::NAN;
        }
        let n = self.n as f64;
        let var = ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}

fn check_samples(n_samples: usize) -> Result<()> {
    if n_samples == 0 {
        Err(Error::param("n_samples must be positive"))
    } else {
        Ok(())
    }
}

fn sample_counts(dim: Dim, beta: f64, j_max: usize, n_samples: usize, seed: u64) -> Result<Vec<Vec<u64>>> {
    (0..n_samples as u64)
        .into_par_iter()
        .map(|i| sample_level_counts(dim, j_max, beta, &mut rng_from_seed(derive_seed(seed, i))))
        .collect()
}

/// Fraction of trees extinct by level `j_max`, against the extinction
/// probability.
///
/// The standard error uses the smoothed proportion `(k + 1/2) / (n + 1)`
/// so it stays positive when no (or every) tree dies.
pub fn mc_extinction(dim: Dim, beta: f64, j_max: usize, n_samples: usize, seed: u64) -> Result<McReport> {
    check_samples(n_samples)?;
    let theory = extinction_probability(dim, beta)?;
    let counts = sample_counts(dim, beta, j_max, n_samples, seed)?;
    let extinct = counts.iter().filter(|v| v[j_max] == 0).count();
    let n = n_samples as f64;
    let estimate = extinct as f64 / n;
    let smoothed = (extinct as f64 + 0.5) / (n + 1.0);
    let std_error = (smoothed * (1.0 - smoothed) / n).sqrt();
    Ok(McReport {
        operation: "extinction".into(),
        config: json!({ "d": dim.d(), "beta": beta, "j_max": j_max, "seed": seed }),
        n_samples,
        n_effective: n_samples,
        estimate: Some(estimate),
        std_error,
        theory_value: Some(theory),
        levels: Vec::new(),
        diagnostics: BTreeMap::new(),
        flags: Vec::new(),
    })
}

/// Box-counting dimension of the level-`j_max` approximation of the random
/// fractal: `log2(mean v(j_max) | survival) / j_max`.
///
/// `levels` carries the martingale `w(j) = v(j) / (2^d beta)^j` averaged
/// over all samples (expected value 1 at every level).
pub fn mc_dimension(dim: Dim, beta: f64, j_max: usize, n_samples: usize, seed: u64) -> Result<McReport> {
    check_samples(n_samples)?;
    if j_max == 0 {
        return Err(Error::param("dimension estimate needs j_max >= 1"));
    }
    let counts = sample_counts(dim, beta, j_max, n_samples, seed)?;
    let mean_offspring = dim.children() as f64 * beta;
    let gamma = dim.d() as f64 + beta.log2();

    let mut w = vec![Moments::default(); j_max + 1];
    let mut survivors = Moments::default();
    for v in &counts {
        for (j, &vj) in v.iter().enumerate() {
            w[j].push(vj as f64 / mean_offspring.powi(j as i32));
        }
        if v[j_max] > 0 {
            survivors.push(v[j_max] as f64);
        }
    }
    let levels = w
        .iter()
        .enumerate()
        .map(|(level, m)| LevelStat {
            level,
            mean: m.mean(),
            std_error: m.std_error(),
        })
        .collect();

    let mut flags = Vec::new();
    if gamma <= 0.0 {
        flags.push("subcritical: tau is empty almost surely".to_string());
    }
    let (estimate, std_error) = if survivors.n == 0 {
        flags.push("empty tau: no tree survives to j_max".to_string());
        (None, f64::NAN)
    } else {
        let mean = survivors.mean();
        let se = if survivors.n > 1 {
            survivors.std_error() / (mean * std::f64::consts::LN_2 * j_max as f64)
        } else {
            f64::NAN
        };
        (Some(mean.log2() / j_max as f64), se)
    };
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("survivor_fraction".into(), survivors.n as f64 / n_samples as f64);
    if survivors.n > 0 {
        diagnostics.insert("mean_surviving_boxes".into(), survivors.mean());
    }
    Ok(McReport {
        operation: "dimension".into(),
        config: json!({ "d": dim.d(), "beta": beta, "j_max": j_max, "seed": seed }),
        n_samples,
        n_effective: survivors.n,
        estimate,
        std_error,
        theory_value: (gamma > 0.0).then_some(gamma),
        levels,
        diagnostics,
        flags,
    })
}

/// Least-squares slope of `y` against `x`.
fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// First level of the geometric fit in [`mc_norm_growth`].
pub const NORM_GROWTH_FIT_START: usize = 5;

/// Level-wise growth of `||f||^p_{B^t_pp}` over trees surviving to `levels`.
///
/// `levels` in the report holds the mean increment per level. The estimate
/// is the fitted per-level ratio of mean increments (least squares on
/// `log2`, levels `>= NORM_GROWTH_FIT_START` or from 1 for shallow
/// profiles); the theory value is `2^d beta 2^(-p (s - t))`, which is `< 1`
/// exactly when `t < s - gamma/p`.
pub fn mc_norm_growth(
    params: &PriorParams,
    t: f64,
    levels: usize,
    n_samples: usize,
    seed: u64,
) -> Result<McReport> {
    check_samples(n_samples)?;
    if levels < 2 {
        return Err(Error::param("norm growth needs at least 2 levels"));
    }
    let params = params.with_j_max(params.j_max.max(levels));
    let profiles = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| truncated_norm_profile(&params, t, levels, derive_seed(seed, i)))
        .collect::<Result<Vec<_>>>()?;

    let mut inc = vec![Moments::default(); levels + 1];
    let mut total = Moments::default();
    for prof in profiles.iter().filter(|p| p.survives()) {
        for (m, v) in inc.iter_mut().zip(&prof.increments) {
            m.push(*v);
        }
        total.push(*prof.partial_sums.last().unwrap());
    }
    let theory = params.dim.children() as f64 * params.beta * (-params.p * (params.s - t)).exp2();
    let mut flags = Vec::new();
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("critical_smoothness".into(), params.critical_smoothness());

    let level_stats: Vec<LevelStat> = if total.n == 0 {
        flags.push("empty tau: no tree survives to the last level".to_string());
        Vec::new()
    } else {
        diagnostics.insert("mean_truncated_norm_p".into(), total.mean());
        inc.iter()
            .enumerate()
            .map(|(level, m)| LevelStat {
                level,
                mean: m.mean(),
                std_error: m.std_error(),
            })
            .collect()
    };

    let start = if levels > NORM_GROWTH_FIT_START + 1 {
        NORM_GROWTH_FIT_START
    } else {
        1
    };
    let fit: Vec<(f64, f64)> = level_stats
        .iter()
        .filter(|s| s.level >= start && s.mean > 0.0)
        .map(|s| (s.level as f64, s.mean.log2()))
        .collect();
    let estimate = (fit.len() >= 2).then(|| {
        let (x, y): (Vec<f64>, Vec<f64>) = fit.into_iter().unzip();
        slope(&x, &y).exp2()
    });

    Ok(McReport {
        operation: "norm-growth".into(),
        config: json!({
            "d": params.dim.d(), "beta": params.beta, "s": params.s, "p": params.p,
            "kappa": params.kappa, "t": t, "levels": levels, "seed": seed,
            "wavelet": params.family.name(),
        }),
        n_samples,
        n_effective: total.n,
        estimate,
        std_error: if total.n > 1 { total.std_error() } else { f64::NAN },
        theory_value: Some(theory),
        levels: level_stats,
        diagnostics,
        flags,
    })
}

/// Dyadic cubes `Q_{j,k}` hit by a tree at one level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FractalApprox {
    pub dim: Dim,
    pub level: usize,
    /// Row-major offsets `k` of the occupied cubes.
    pub boxes: Vec<usize>,
}

impl FractalApprox {
    pub fn from_mask(mask: &SubtreeMask, level: usize) -> Result<Self> {
        if level > mask.j_max() {
            return Err(Error::param(format!("level {level} exceeds j_max {}", mask.j_max())));
        }
        let boxes = mask
            .level(level)
            .iter()
            .enumerate()
            .filter_map(|(k, &b)| b.then_some(k))
            .collect();
        Ok(Self {
            dim: mask.dim(),
            level,
            boxes,
        })
    }

    pub fn box_count(&self) -> usize {
        self.boxes.len()
    }

    /// Every box lies inside a box of `coarser`, one level up.
    pub fn refines(&self, coarser: &FractalApprox) -> bool {
        if coarser.level + 1 != self.level || coarser.dim != self.dim {
            return false;
        }
        let tree = crate::tree::EntireTree::new(self.dim, self.level);
        self.boxes
            .iter()
            .all(|&k| coarser.boxes.binary_search(&tree.parent_offset(self.level, k)).is_ok())
    }
}

/// Slope of `log2 N(j)` against `j` over `min_level..=j_max`, or `None` if
/// the tree dies before `j_max` or fewer than two levels are available.
pub fn box_counting_dimension(mask: &SubtreeMask, min_level: usize) -> Result<Option<f64>> {
    let counts = mask.level_counts()?;
    if min_level + 1 > mask.j_max() || counts[mask.j_max()] == 0 {
        return Ok(None);
    }
    let (x, y): (Vec<f64>, Vec<f64>) = (min_level..=mask.j_max())
        .map(|j| (j as f64, (counts[j] as f64).log2()))
        .unzip();
    Ok(Some(slope(&x, &y)))
}

fn check_same_len(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::structure(format!(
            "metric inputs must be non-empty and equally long ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    Ok(())
}

pub fn l2_error(x: &[f64], y: &[f64]) -> Result<f64> {
    check_same_len(x, y)?;
    Ok(x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
}

pub fn mse(x: &[f64], y: &[f64]) -> Result<f64> {
    check_same_len(x, y)?;
    Ok(x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / x.len() as f64)
}

pub fn rmse(x: &[f64], y: &[f64]) -> Result<f64> {
    mse(x, y).map(f64::sqrt)
}

/// `10 log10(peak^2 / MSE)`; `+inf` for identical inputs.
pub fn psnr(reference: &[f64], test: &[f64], peak: f64) -> Result<f64> {
    if !(peak > 0.0) {
        return Err(Error::param(format!("peak must be > 0, got {peak}")));
    }
    let e = mse(reference, test)?;
    Ok(if e == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (peak * peak / e).log10()
    })
}

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

fn gaussian_window() -> Vec<f64> {
    let half = (SSIM_WINDOW / 2) as f64;
    let w: Vec<f64> = (0..SSIM_WINDOW)
        .map(|i| (-(i as f64 - half).powi(2) / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp())
        .collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// Separable "valid" filtering of a row-major `rows x cols` array.
fn filter_valid(data: &[f64], rows: usize, cols: usize, w: &[f64]) -> (Vec<f64>, usize, usize) {
    let k = w.len();
    let oc = cols - k + 1;
    let or = rows - k + 1;
    let mut tmp = vec![0.0; rows * oc];
    for r in 0..rows {
        let row = &data[r * cols..(r + 1) * cols];
        for c in 0..oc {
            tmp[r * oc + c] = w.iter().zip(&row[c..c + k]).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = vec![0.0; or * oc];
    for r in 0..or {
        for c in 0..oc {
            out[r * oc + c] = (0..k).map(|i| w[i] * tmp[(r + i) * oc + c]).sum();
        }
    }
    (out, or, oc)
}

/// Mean structural similarity over all full 11x11 Gaussian windows
/// (`sigma = 1.5`, `K1 = 0.01`, `K2 = 0.03`).
pub fn ssim(reference: &Image, test: &Image, dynamic_range: f64) -> Result<f64> {
    if reference.rows() != test.rows() || reference.cols() != test.cols() {
        return Err(Error::structure("SSIM inputs differ in size"));
    }
    if reference.rows() < SSIM_WINDOW || reference.cols() < SSIM_WINDOW {
        return Err(Error::Sizing {
            what: format!("SSIM needs images of at least {SSIM_WINDOW}x{SSIM_WINDOW}"),
            required: SSIM_WINDOW,
        });
    }
    if !(dynamic_range > 0.0) {
        return Err(Error::param("dynamic range must be > 0"));
    }
    let (rows, cols) = (reference.rows(), reference.cols());
    let w = gaussian_window();
    let x = reference.data();
    let y = test.data();
    let prod = |f: &dyn Fn(f64, f64) -> f64| -> Vec<f64> { x.iter().zip(y).map(|(a, b)| f(*a, *b)).collect() };
    let (mu_x, _, _) = filter_valid(x, rows, cols, &w);
    let (mu_y, _, _) = filter_valid(y, rows, cols, &w);
    let (xx, _, _) = filter_valid(&prod(&|a, _| a * a), rows, cols, &w);
    let (yy, _, _) = filter_valid(&prod(&|_, b| b * b), rows, cols, &w);
    let (xy, _, _) = filter_valid(&prod(&|a, b| a * b), rows, cols, &w);
    let c1 = (SSIM_K1 * dynamic_range).powi(2);
    let c2 = (SSIM_K2 * dynamic_range).powi(2);
    let n = mu_x.len();
    let total: f64 = (0..n)
        .map(|i| {
            let (mx, my) = (mu_x[i], mu_y[i]);
            let sx = xx[i] - mx * mx;
            let sy = yy[i] - my * my;
            let sxy = xy[i] - mx * my;
            ((2.0 * mx * my + c1) * (2.0 * sxy + c2)) / ((mx * mx + my * my + c1) * (sx + sy + c2))
        })
        .sum();
    Ok(total / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::sample_tree;
    use crate::wavelet::WaveletFamily;
    use rand::Rng;

    #[test]
    fn extinction_report() {
        let r = mc_extinction(Dim::One, 0.75, 30, 20_000, 1).unwrap();
        assert_eq!(r.operation, "extinction");
        assert!((r.theory_value.unwrap() - 1.0 / 9.0).abs() < 1e-10);
        assert!((r.estimate.unwrap() - 1.0 / 9.0).abs() < 4.0 * r.std_error);
        assert!(r.std_error > 0.0);
        assert_eq!(mc_extinction(Dim::One, 0.75, 30, 20_000, 1).unwrap(), r);
    }

    #[test]
    fn full_tree_never_dies() {
        let r = mc_extinction(Dim::Two, 1.0, 20, 500, 3).unwrap();
        assert_eq!(r.estimate, Some(0.0));
        assert!(r.std_error > 0.0);
    }

    #[test]
    fn subcritical_extinction_approaches_one() {
        let shallow = mc_extinction(Dim::One, 0.4, 2, 20_000, 5).unwrap().estimate.unwrap();
        let deep = mc_extinction(Dim::One, 0.4, 40, 20_000, 5).unwrap().estimate.unwrap();
        assert!(shallow < deep);
        assert!(deep > 0.999);
        assert_eq!(mc_extinction(Dim::One, 0.4, 40, 20_000, 5).unwrap().theory_value, Some(1.0));
    }

    #[test]
    fn extinction_by_depth_is_monotone() {
        let est: Vec<f64> = [1, 2, 4, 8, 16]
            .iter()
            .map(|&j| mc_extinction(Dim::Two, 0.3, j, 20_000, 9).unwrap().estimate.unwrap())
            .collect();
        assert!(est.windows(2).all(|w| w[0] <= w[1] + 0.01), "{est:?}");
    }

    #[test]
    fn dimension_full_tree() {
        let r = mc_dimension(Dim::Two, 1.0, 8, 50, 0).unwrap();
        assert_eq!(r.estimate, Some(2.0));
        assert_eq!(r.theory_value, Some(2.0));
        assert!(r.levels.iter().all(|l| l.mean == 1.0));
    }

    #[test]
    fn dimension_subcritical_is_empty() {
        let r = mc_dimension(Dim::One, 0.3, 60, 2_000, 0).unwrap();
        assert_eq!(r.estimate, None);
        assert_eq!(r.theory_value, None);
        assert!(r.flags.iter().any(|f| f.contains("empty tau")));
        let json = serde_json::to_value(&r).unwrap();
        assert!(json["estimate"].is_null());
    }

    #[test]
    fn dimension_supercritical() {
        let beta = 2f64.powf(-0.5);
        let r = mc_dimension(Dim::One, beta, 20, 5_000, 2).unwrap();
        assert!(r.n_effective > 1_000);
        assert!((r.estimate.unwrap() - 0.5).abs() < 0.1);
    }

    #[test]
    fn fractal_boxes_refine() {
        for seed in 0..20 {
            let mask = sample_tree(Dim::Two, 6, 0.7, seed).unwrap();
            for j in 1..=6 {
                let fine = FractalApprox::from_mask(&mask, j).unwrap();
                let coarse = FractalApprox::from_mask(&mask, j - 1).unwrap();
                assert!(fine.refines(&coarse));
                assert!(fine.box_count() <= 4 * coarse.box_count());
            }
        }
        let full = SubtreeMask::full(Dim::One, 10);
        assert!((box_counting_dimension(&full, 2).unwrap().unwrap() - 1.0).abs() < 1e-12);
        let root = SubtreeMask::root_only(Dim::One, 10);
        assert_eq!(box_counting_dimension(&root, 2).unwrap(), None);
    }

    #[test]
    fn norm_growth_ratio_tracks_theory() {
        let beta = 2f64.powf(-0.5);
        let params = PriorParams::new(1.0, 2.0, 1.0, beta, Dim::One, WaveletFamily::haar(), 12).unwrap();
        let below = mc_norm_growth(&params, 0.25, 12, 600, 4).unwrap();
        assert!((below.theory_value.unwrap() - 2f64.powf(-1.0)).abs() < 1e-12);
        assert!((below.estimate.unwrap() - 0.5).abs() < 0.1, "{:?}", below.estimate);
        let at = mc_norm_growth(&params, 0.75, 12, 600, 4).unwrap();
        assert!((at.theory_value.unwrap() - 1.0).abs() < 1e-12);
        assert!((at.estimate.unwrap() - 1.0).abs() < 0.15, "{:?}", at.estimate);
    }

    #[test]
    fn reports_are_reproducible() {
        let a = mc_dimension(Dim::Two, 0.5, 6, 300, 11).unwrap();
        let b = mc_dimension(Dim::Two, 0.5, 6, 300, 11).unwrap();
        assert_eq!(a, b);
        let c = mc_dimension(Dim::Two, 0.5, 6, 300, 12).unwrap();
        assert_ne!(a.estimate, c.estimate);
        assert!(mc_dimension(Dim::Two, 0.5, 6, 0, 11).is_err());
    }

    #[test]
    fn error_metrics() {
        let x = vec![1.0, 2.0, 3.0, 4.0];
        assert_eq!(l2_error(&x, &x).unwrap(), 0.0);
        assert_eq!(rmse(&x, &x).unwrap(), 0.0);
        let y: Vec<f64> = x.iter().map(|v| v - 0.5).collect();
        assert!((l2_error(&x, &y).unwrap() - 0.5 * 2.0).abs() < 1e-15);
        assert!((rmse(&x, &y).unwrap() - 0.5).abs() < 1e-15);
        assert!(rmse(&x, &y[..3]).is_err());
    }

    #[test]
    fn psnr_values() {
        let x = vec![0.2, 0.4, 0.9, 0.1];
        assert_eq!(psnr(&x, &x, 1.0).unwrap(), f64::INFINITY);
        let y: Vec<f64> = x.iter().map(|v| v + 255.0).collect();
        assert!(psnr(&x, &y, 255.0).unwrap().abs() < 1e-12);
        let z: Vec<f64> = x.iter().map(|v| v + 25.5).collect();
        assert!((psnr(&x, &z, 255.0).unwrap() - 20.0).abs() < 1e-12);
        assert!(psnr(&x, &z, 0.0).is_err());
    }

    #[test]
    fn psnr_is_shift_invariant() {
        let mut rng = rng_from_seed(0);
        let x: Vec<f64> = (0..100).map(|_| rng.random_range(0.0..1.0)).collect();
        let e: Vec<f64> = (0..100).map(|_| rng.random_range(-0.1..0.1)).collect();
        let xe: Vec<f64> = x.iter().zip(&e).map(|(a, b)| a + b).collect();
        let base = psnr(&x, &xe, 1.0).unwrap();
        let xs: Vec<f64> = x.iter().map(|v| v + 7.25).collect();
        let xes: Vec<f64> = xe.iter().map(|v| v + 7.25).collect();
        assert!((psnr(&xs, &xes, 1.0).unwrap() - base).abs() < 1e-9);
    }

    fn random_image(rows: usize, cols: usize, seed: u64) -> Image {
        let mut rng = rng_from_seed(seed);
        Image::from_fn(rows, cols, |_, _| rng.random_range(0.0..255.0))
    }

    #[test]
    fn ssim_values() {
        let smooth = Image::from_fn(64, 64, |r, c| 128.0 + 60.0 * ((r as f64) / 7.0).sin() * ((c as f64) / 5.0).cos());
        assert!((ssim(&smooth, &smooth, 255.0).unwrap() - 1.0).abs() < 1e-12);
        let neg = Image::from_fn(64, 64, |r, c| 255.0 - smooth.get(r, c));
        assert!(ssim(&smooth, &neg, 255.0).unwrap() < 0.5);
        let a = random_image(96, 96, 1);
        let b = random_image(96, 96, 2);
        assert!(ssim(&a, &b, 255.0).unwrap().abs() < 0.05);
        assert!(ssim(&Image::zeros(8, 8), &Image::zeros(8, 8), 255.0).is_err());
        assert!(ssim(&a, &random_image(96, 64, 3), 255.0).is_err());
    }
}
