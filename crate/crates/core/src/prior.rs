//! Random tree Besov priors.
//!
//! A draw is `f = sum_{(j,k) in T, l} h_j X^l_{jk} psi^l_{jk}` where `T` is a
//! Galton–Watson tree with wavelet density `beta`, the `X` are i.i.d.
//! generalized Gaussian `N_p(0, kappa^p)` with density
//! `∝ exp(-|x|^p / (2 kappa^p))`, and `h_j = 2^(-j (s + d/2 - d/p))`.
//! With `beta = 1` the tree is complete and this is the plain Besov prior.

use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};
use crate::tree::{sample_tree, Dim, SubtreeMask};
use crate::wavelet::{inverse, CoeffPyramid, Field, WaveletFamily};

#[derive(Debug, Clone, PartialEq)]
pub struct PriorParams {
    /// Smoothness `s`.
    pub s: f64,
    /// Integrability exponent `p >= 1`.
    pub p: f64,
    pub kappa: f64,
    /// Wavelet density `beta in (0, 1]`.
    pub beta: f64,
    pub dim: Dim,
    pub family: WaveletFamily,
    pub j_max: usize,
}

impl PriorParams {
    /// Default depth: 1024 samples in 1D, 256x256 in 2D.
    pub fn default_j_max(dim: Dim) -> usize {
        match dim {
            Dim::One => 9,
            Dim::Two => 7,
        }
    }

    pub fn new(
        s: f64,
        p: f64,
        kappa: f64,
        beta: f64,
        dim: Dim,
        family: WaveletFamily,
        j_max: usize,
    ) -> Result<Self> {
        let params = Self {
            s,
            p,
            kappa,
            beta,
            dim,
            family,
            j_max,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        check_np(self.p, self.kappa)?;
        if !self.s.is_finite() {
            return Err(Error::param(format!("smoothness must be finite, got {}", self.s)));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::param(format!("beta must lie in (0, 1], got {}", self.beta)));
        }
        if self.j_max > 24 {
            return Err(Error::param(format!("j_max {} is too deep for a dense grid", self.j_max)));
        }
        Ok(())
    }

    pub fn with_j_max(&self, j_max: usize) -> Self {
        Self {
            j_max,
            ..self.clone()
        }
    }

    /// `h_j = 2^(-j (s + d/2 - d/p))`
    pub fn weight(&self, j: usize) -> f64 {
        let d = self.dim.d() as f64;
        (-(j as f64) * (self.s + d / 2.0 - d / self.p)).exp2()
    }

    /// `gamma = d + log2(beta)`, the dimension of the limiting fractal.
    pub fn gamma(&self) -> f64 {
        self.dim.d() as f64 + self.beta.log2()
    }

    /// `s - gamma / p`: draws lie in `B^t_pp` for `t` below this and not at it.
    pub fn critical_smoothness(&self) -> f64 {
        self.s - self.gamma() / self.p
    }
}

pub fn weight_h(j: usize, params: &PriorParams) -> f64 {
    params.weight(j)
}

fn check_np(p: f64, kappa: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::param(format!("exponent p must be >= 1 and finite, got {p}")));
    }
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::param(format!("scale kappa must be > 0, got {kappa}")));
    }
    Ok(())
}

/// Generalized Gaussian `N_p(0, kappa^p)`.
///
/// Sampled as `|X| = (2 kappa^p G)^(1/p)` with `G ~ Gamma(1/p, 1)` and an
/// independent fair sign.
#[derive(Debug, Clone, Copy)]
pub struct GeneralizedGaussian {
    p: f64,
    kappa: f64,
    gamma: Gamma<f64>,
}

impl GeneralizedGaussian {
    pub fn new(p: f64, kappa: f64) -> Result<Self> {
        check_np(p, kappa)?;
        let gamma = Gamma::new(1.0 / p, 1.0).map_err(|e| Error::param(e.to_string()))?;
        Ok(Self { p, kappa, gamma })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }
}

impl Distribution<f64> for GeneralizedGaussian {
    fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let g = self.gamma.sample(rng);
        let magnitude = (2.0 * self.kappa.powf(self.p) * g).powf(1.0 / self.p);
        if rng.random::<bool>() {
            magnitude
        } else {
            -magnitude
        }
    }
}

pub fn sample_np(p: f64, kappa: f64, seed: u64) -> Result<f64> {
    let dist = GeneralizedGaussian::new(p, kappa)?;
    Ok(dist.sample(&mut rng_from_seed(seed)))
}

#[derive(Debug, Clone)]
pub struct PriorDraw {
    pub mask: SubtreeMask,
    pub coeffs: CoeffPyramid,
    /// Synthesised function on the `2^(j_max+1)` grid.
    pub field: Field,
}

/// Tree and coefficients of a draw, without synthesis.
///
/// The tree uses seed `derive_seed(seed, 0)` (so it equals
/// `sample_tree(d, j_max, beta, derive_seed(seed, 0))`), the coefficients
/// `derive_seed(seed, 1)`. Coefficients are drawn level by level, so the
/// first levels of a draw do not depend on `j_max`.
pub fn sample_prior_coefficients(
    params: &PriorParams,
    seed: u64,
) -> Result<(SubtreeMask, CoeffPyramid)> {
    params.validate()?;
    let mask = sample_tree(params.dim, params.j_max, params.beta, derive_seed(seed, 0))?;
    let dist = GeneralizedGaussian::new(params.p, params.kappa)?;
    let mut rng = rng_from_seed(derive_seed(seed, 1));
    let mut coeffs = CoeffPyramid::zeros(params.dim, params.j_max);
    let level_count = params.dim.subbands();
    for j in 0..=params.j_max {
        let h = params.weight(j);
        let chosen: Vec<usize> = mask
            .level(j)
            .iter()
            .enumerate()
            .filter_map(|(o, &b)| b.then_some(o))
            .collect();
        for l in 1..=level_count {
            for &off in &chosen {
                coeffs.set_detail(j, l, off, h * dist.sample(&mut rng));
            }
        }
    }
    Ok((mask, coeffs))
}

/// One prior draw. The approximation coefficient is zero.
pub fn sample_prior_draw(params: &PriorParams, seed: u64) -> Result<PriorDraw> {
    let (mask, coeffs) = sample_prior_coefficients(params, seed)?;
    let field = inverse(&coeffs, &params.family)?;
    Ok(PriorDraw {
        mask,
        coeffs,
        field,
    })
}

/// Per-level terms `2^(j p (t + d/2 - d/p)) * sum_{k,l} |f^l_jk|^p`,
/// `j = 0..=j_max`.
pub fn besov_level_terms(coeffs: &CoeffPyramid, t: f64, p: f64) -> Vec<f64> {
    let d = coeffs.dim().d() as f64;
    coeffs
        .levels()
        .iter()
        .enumerate()
        .map(|(j, level)| {
            let w = (j as f64 * p * (t + d / 2.0 - d / p)).exp2();
            w * level.iter().map(|v| v.abs().powf(p)).sum::<f64>()
        })
        .collect()
}

/// Discrete `B^t_pp` norm, approximation coefficient counted with unit
/// weight as the `j = -1` block.
pub fn besov_norm(coeffs: &CoeffPyramid, t: f64, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::param(format!("exponent p must be >= 1, got {p}")));
    }
    let total = coeffs.approx().abs().powf(p) + besov_level_terms(coeffs, t, p).iter().sum::<f64>();
    Ok(total.powf(1.0 / p))
}

/// Level-wise contributions to `||f||^p_{B^t_pp}` of one prior draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormProfile {
    /// Contribution of level `j`, `j = 0..=levels`.
    pub increments: Vec<f64>,
    /// Running sums of `increments`.
    pub partial_sums: Vec<f64>,
    /// Tree level sizes `v(j)`.
    pub level_counts: Vec<usize>,
}

impl NormProfile {
    /// The tree reaches the deepest level of the profile.
    pub fn survives(&self) -> bool {
        self.level_counts.last().is_some_and(|&v| v > 0)
    }
}

/// Truncated `B^t_pp` norm (p-th power) of a draw, accumulated over levels
/// `0..=levels`.
pub fn truncated_norm_profile(
    params: &PriorParams,
    t: f64,
    levels: usize,
    seed: u64,
) -> Result<NormProfile> {
    if levels > params.j_max {
        return Err(Error::param(format!(
            "profile depth {levels} exceeds j_max {}",
            params.j_max
        )));
    }
    let truncated = params.with_j_max(levels);
    let (mask, coeffs) = sample_prior_coefficients(&truncated, seed)?;
    let increments = besov_level_terms(&coeffs, t, params.p);
    let partial_sums = increments
        .iter()
        .scan(0.0, |acc, v| {
            *acc += v;
            Some(*acc)
        })
        .collect();
    Ok(NormProfile {
        increments,
        partial_sums,
        level_counts: mask.level_counts()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use crate::tree::EntireTree;
    use crate::wavelet::inverse_dwt;

    fn params(s: f64, p: f64, beta: f64, dim: Dim, j_max: usize) -> PriorParams {
        PriorParams::new(s, p, 1.0, beta, dim, WaveletFamily::haar(), j_max).unwrap()
    }

    #[test]
    fn weights() {
        assert!((params(1.0, 1.0, 1.0, Dim::One, 4).weight(2) - 0.5).abs() < 1e-15);
        assert!((params(1.0, 2.0, 1.0, Dim::Two, 4).weight(3) - 0.125).abs() < 1e-15);
        for (s, p) in [(0.3, 1.0), (2.0, 3.5), (-1.0, 1.2)] {
            assert_eq!(weight_h(0, &params(s, p, 0.5, Dim::One, 3)), 1.0);
        }
    }

    #[test]
    fn gamma_and_critical_smoothness() {
        let pr = params(1.0, 2.0, 0.5f64.sqrt(), Dim::One, 3);
        assert!((pr.gamma() - 0.5).abs() < 1e-12);
        assert!((pr.critical_smoothness() - 0.75).abs() < 1e-12);
        assert_eq!(params(1.0, 2.0, 1.0, Dim::Two, 3).gamma(), 2.0);
    }

    #[test]
    fn invalid_parameters() {
        let fam = WaveletFamily::haar();
        assert!(PriorParams::new(1.0, 0.5, 1.0, 0.5, Dim::One, fam.clone(), 3).is_err());
        assert!(PriorParams::new(1.0, 2.0, 0.0, 0.5, Dim::One, fam.clone(), 3).is_err());
        assert!(PriorParams::new(1.0, 2.0, 1.0, 0.0, Dim::One, fam.clone(), 3).is_err());
        assert!(PriorParams::new(1.0, 2.0, 1.0, 1.1, Dim::One, fam, 3).is_err());
        assert!(sample_np(0.9, 1.0, 0).is_err());
        assert!(sample_np(2.0, -1.0, 0).is_err());
        assert!(sample_np(2.0, 1.0, 0).unwrap().is_finite());
    }

    #[test]
    fn np_sign_is_symmetric() {
        for p in [1.0, 1.5, 2.0, 4.0] {
            let dist = GeneralizedGaussian::new(p, 0.7).unwrap();
            let mut rng = rng_from_seed(p.to_bits());
            let n = 200_000;
            let s: f64 = (0..n).map(|_| dist.sample(&mut rng).signum()).sum();
            let mean = s / n as f64;
            // sign has unit variance
            assert!(mean.abs() < 3.0 / (n as f64).sqrt(), "p={p}: {mean}");
        }
    }

    #[test]
    fn np_moments_small_sample() {
        // p=2: E X^2 = kappa^2; p=1: E|X| = 2 kappa
        let mut rng = rng_from_seed(1);
        let g = GeneralizedGaussian::new(2.0, 1.0).unwrap();
        let n = 1_000_000;
        let var: f64 = (0..n).map(|_| g.sample(&mut rng).powi(2)).sum::<f64>() / n as f64;
        assert!((var - 1.0).abs() < 0.01, "{var}");
        let l = GeneralizedGaussian::new(1.0, 1.0).unwrap();
        let m: f64 = (0..n).map(|_| l.sample(&mut rng).abs()).sum::<f64>() / n as f64;
        assert!((m - 2.0).abs() < 0.02, "{m}");
    }

    #[test]
    fn draws_vanish_off_the_tree() {
        for dim in [Dim::One, Dim::Two] {
            let pr = params(1.0, 1.5, 0.6, dim, 5);
            for seed in 0..20 {
                let draw = sample_prior_draw(&pr, seed).unwrap();
                assert!(draw.mask.is_proper());
                assert_eq!(draw.coeffs.approx(), 0.0);
                assert_eq!(draw.mask, sample_tree(dim, 5, 0.6, derive_seed(seed, 0)).unwrap());
                let tree = EntireTree::new(dim, 5);
                for j in 0..=5 {
                    for off in 0..tree.level_len(j) {
                        let on = draw.mask.is_chosen(j, off);
                        for v in draw.coeffs.node_values(j, off) {
                            if !on {
                                assert_eq!(v, 0.0);
                            } else {
                                assert_ne!(v, 0.0);
                            }
                        }
                    }
                }
                let back = inverse(&draw.coeffs, &pr.family).unwrap();
                assert_eq!(back, draw.field);
            }
        }
    }

    #[test]
    fn coefficient_scale_under_full_tree() {
        // beta=1, p=2: sd of h_j X at a fixed node is h_j * kappa
        let mut pr = params(0.8, 2.0, 1.0, Dim::One, 4);
        pr.kappa = 1.7;
        let n = 10_000;
        for (j, off) in [(0usize, 0usize), (2, 3), (4, 9)] {
            let mut sq = 0.0;
            for seed in 0..n {
                let (_, c) = sample_prior_coefficients(&pr, seed).unwrap();
                sq += c.detail(j, 1, off).powi(2);
            }
            let sd = (sq / n as f64).sqrt();
            let expected = pr.weight(j) * pr.kappa;
            assert!((sd / expected - 1.0).abs() < 0.03, "j={j}: {sd} vs {expected}");
        }
    }

    #[test]
    fn root_only_draw_is_combination_of_root_wavelets() {
        let pr = params(1.0, 2.0, 1e-12, Dim::One, 4);
        let draw = sample_prior_draw(&pr, 3).unwrap();
        assert_eq!(draw.mask, SubtreeMask::root_only(Dim::One, 4));
        let mut root = CoeffPyramid::zeros(Dim::One, 4);
        root.set_detail(0, 1, 0, 1.0);
        let psi = inverse_dwt(&root, &pr.family).unwrap();
        let c = draw.coeffs.detail(0, 1, 0);
        for (a, b) in draw.field.values().iter().zip(&psi) {
            assert!((a - c * b).abs() < 1e-12);
        }
    }

    #[test]
    fn draws_at_several_densities() {
        for beta in [0.6, 0.75, 0.9] {
            let pr = params(1.0, 2.0, beta, Dim::One, PriorParams::default_j_max(Dim::One));
            let n = 300;
            let mut mean_v2 = 0.0;
            for seed in 0..n {
                let draw = sample_prior_draw(&pr, seed).unwrap();
                assert_eq!(draw.field.len(), 1024);
                assert!(draw.field.values().iter().all(|v| v.is_finite()));
                mean_v2 += draw.mask.level_counts().unwrap()[2] as f64 / n as f64;
            }
            // E v(2) = (2 beta)^2, v(2) <= 4
            let expected = (2.0 * beta).powi(2);
            assert!((mean_v2 - expected).abs() < 0.25, "beta={beta}: {mean_v2}");
        }
    }

    #[test]
    fn besov_norm_basics() {
        let zero = CoeffPyramid::zeros(Dim::One, 3);
        assert_eq!(besov_norm(&zero, 1.0, 2.0).unwrap(), 0.0);
        let mut single = CoeffPyramid::zeros(Dim::One, 3);
        single.set_detail(0, 1, 0, -2.5);
        for t in [-1.0, 0.0, 0.7, 3.0] {
            assert!((besov_norm(&single, t, 1.3).unwrap() - 2.5).abs() < 1e-12);
        }
        assert!(besov_norm(&single, 1.0, 0.5).is_err());
        let mut approx = CoeffPyramid::zeros(Dim::Two, 2);
        approx.set_approx(3.0);
        assert!((besov_norm(&approx, 5.0, 2.0).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn besov_norm_scales_with_smoothness() {
        // only level-j mass: ratio between t2 and t1 is 2^(j (t2 - t1))
        let j = 3;
        let mut c = CoeffPyramid::zeros(Dim::One, 4);
        for (i, v) in [0.3, -1.2, 0.8, 2.0].iter().enumerate() {
            c.set_detail(j, 1, i, *v);
        }
        let (t1, t2, p) = (0.4, 1.1, 1.7);
        let ratio = besov_norm(&c, t2, p).unwrap() / besov_norm(&c, t1, p).unwrap();
        let expected = (j as f64 * (t2 - t1) * p / p).exp2();
        assert!((ratio - expected).abs() < 1e-12);
    }

    #[test]
    fn profile_regimes() {
        // beta = 1, p = 2, t = s: increments are sum of X^2 over 2^j nodes
        let pr = params(1.0, 2.0, 1.0, Dim::One, 8);
        let prof = truncated_norm_profile(&pr, 1.0, 8, 5).unwrap();
        assert_eq!(prof.level_counts, (0..=8).map(|j| 1usize << j).collect::<Vec<_>>());
        // average over draws grows like 2^j
        let n = 400;
        let mut mean = vec![0.0; 9];
        for seed in 0..n {
            let pf = truncated_norm_profile(&pr, 1.0, 8, seed).unwrap();
            for j in 0..=8 {
                mean[j] += pf.increments[j] / n as f64;
            }
        }
        for j in 0..=8 {
            let expected = (1u64 << j) as f64;
            assert!((mean[j] / expected - 1.0).abs() < 0.15, "j={j}: {}", mean[j]);
        }

        // t far below s: converges
        let pr = params(2.0, 2.0, 0.8, Dim::One, 20);
        let prof = truncated_norm_profile(&pr, 0.0, 20, 1).unwrap();
        let total = *prof.partial_sums.last().unwrap();
        let tail: f64 = prof.increments[17..].iter().sum();
        assert!(tail < 1e-6 * total.max(1e-300));
        assert!(prof.partial_sums.windows(2).all(|w| w[1] >= w[0]));

        assert!(truncated_norm_profile(&pr, 0.0, 21, 1).is_err());
    }

    #[test]
    fn profile_prefix_is_independent_of_depth() {
        let pr = params(1.0, 2.0, 0.8, Dim::One, 12);
        let a = truncated_norm_profile(&pr, 0.5, 6, 9).unwrap();
        let b = truncated_norm_profile(&pr, 0.5, 12, 9).unwrap();
        assert_eq!(a.increments[..], b.increments[..7]);
    }
}
