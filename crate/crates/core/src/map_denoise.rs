//! Exact MAP estimation for `M = f + W` under the discrete random tree prior.
//!
//! Coefficients are modelled in unit-noise units: `m = t̃ g + w` with
//! `w ~ N(0, 1)`, `g` Gaussian or Laplace, and `t̃` the indicator of a
//! proper subtree whose nodes are kept with probability `beta`. The negative
//! log posterior is
//!
//! ```text
//! F = sum_{root}          [ cost(m, g) ]
//!   + sum_{kept, non-root} [ cost(m, g) - log(beta) ]
//!   + sum_{dropped}        [ m^2 / 2   - log(1 - beta) ]
//! ```
//!
//! where `cost(m, g) = (m - g)^2 / 2 + R(g)` is summed over the `2^d - 1`
//! subbands of a node and the Bernoulli term is paid once per node. The
//! minimum over `(g, t)` is found exactly by a bottom-up sweep: each node
//! holds its optimal subtree value `F_(j,k)` and the energy of its full
//! subtree, and each child is kept iff `F_child - log(beta)` is strictly
//! below `||m|_child||^2 / 2 - s_child log(1 - beta)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::{Dim, EntireTree, NodeIndex, SubtreeMask};
use crate::wavelet::{forward, inverse, CoeffPyramid, Field, WaveletFamily};

/// Levels at least this wide are swept in parallel.
const PAR_LEVEL_LEN: usize = 1 << 12;

/// Coefficient prior of kept nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PriorKind {
    /// `g ~ N(0, sigma^2)`, penalty `g^2 / (2 sigma^2)`. Pruning.
    Gauss { sigma: f64 },
    /// Penalty `a |g|`: soft thresholding at `a` inside the kept tree.
    Laplace { a: f64 },
}

impl PriorKind {
    pub fn gauss() -> Self {
        PriorKind::Gauss { sigma: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let (name, v) = match *self {
            PriorKind::Gauss { sigma } => ("sigma", sigma),
            PriorKind::Laplace { a } => ("a", a),
        };
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::param(format!("prior parameter {name} must be > 0, got {v}")))
        }
    }

    /// `(min_g cost, argmin_g)` for a single coefficient.
    #[inline]
    pub fn node_cost(&self, m: f64) -> (f64, f64) {
        match *self {
            PriorKind::Gauss { sigma } => node_cost_gauss(m, sigma),
            PriorKind::Laplace { a } => node_cost_laplace(m, a),
        }
    }

    /// `R(g)`.
    #[inline]
    pub fn penalty(&self, g: f64) -> f64 {
        match *self {
            PriorKind::Gauss { sigma } => g * g / (2.0 * sigma * sigma),
            PriorKind::Laplace { a } => a * g.abs(),
        }
    }
}

/// `min_g (m-g)^2/2 + g^2/(2 sigma^2) = m^2 / (2 (1 + sigma^2))`, attained at
/// `g = m sigma^2 / (1 + sigma^2)` (`m/2` for `sigma = 1`).
#[inline]
pub fn node_cost_gauss(m: f64, sigma: f64) -> (f64, f64) {
    let s2 = sigma * sigma;
    (m * m / (2.0 * (1.0 + s2)), m * s2 / (1.0 + s2))
}

/// `min_g (m-g)^2/2 + a|g|`: soft threshold at `a`.
#[inline]
pub fn node_cost_laplace(m: f64, a: f64) -> (f64, f64) {
    let abs = m.abs();
    if abs <= a {
        (0.5 * m * m, 0.0)
    } else {
        (a * abs - 0.5 * a * a, m - a * m.signum())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenoiseConfig {
    /// Wavelet density, `0 < beta < 1`.
    pub beta: f64,
    pub prior: PriorKind,
    pub family: WaveletFamily,
    pub dim: Dim,
}

impl DenoiseConfig {
    pub fn new(beta: f64, prior: PriorKind, family: WaveletFamily, dim: Dim) -> Result<Self> {
        let cfg = Self {
            beta,
            prior,
            family,
            dim,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::param(format!(
                "wavelet density beta must lie in (0, 1), got {}",
                self.beta
            )));
        }
        self.prior.validate()
    }

    fn keep_penalty(&self) -> f64 {
        -self.beta.ln()
    }

    fn drop_penalty(&self) -> f64 {
        -(1.0 - self.beta).ln()
    }
}

/// Output of [`dp_map`], in the units of the input coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct MapEstimate {
    /// Selected tree.
    pub mask: SubtreeMask,
    /// Estimated coefficients `g`: shrunk on the tree, zero off it; the
    /// approximation coefficient is copied through.
    pub coeffs_hat: CoeffPyramid,
    /// Minimal value of the negative log posterior.
    pub objective: f64,
}

#[derive(Debug, Clone, Copy)]
struct NodeSolution {
    value: f64,
    energy: f64,
    keep_bits: u8,
}

/// Exact joint minimiser over trees and coefficients.
pub fn dp_map(coeffs: &CoeffPyramid, config: &DenoiseConfig) -> Result<MapEstimate> {
    config.validate()?;
    coeffs.validate()?;
    if coeffs.dim() != config.dim {
        return Err(Error::param(format!(
            "pyramid is {}D but the configuration is {}D",
            coeffs.dim().d(),
            config.dim.d()
        )));
    }
    let dim = config.dim;
    let j_max = coeffs.j_max();
    let tree = EntireTree::new(dim, j_max);
    let keep_pen = config.keep_penalty();
    let drop_pen = config.drop_penalty();
    let prior = config.prior;

    let mut solutions: Vec<Vec<NodeSolution>> = vec![Vec::new(); j_max + 1];
    for j in (0..=j_max).rev() {
        let len = tree.level_len(j);
        let level = coeffs.level(j);
        let below = solutions.get(j + 1).filter(|_| j < j_max);
        let child_drop = if j < j_max {
            tree.subtree_size(j + 1) as f64 * drop_pen
        } else {
            0.0
        };
        let solve = |off: usize| -> NodeSolution {
            let mut value = 0.0;
            let mut energy = 0.0;
            for l in 0..dim.subbands() {
                let m = level[l * len + off];
                value += prior.node_cost(m).0;
                energy += 0.5 * m * m;
            }
            let mut keep_bits = 0u8;
            if let Some(children) = below {
                for (i, c) in tree.child_offsets(j, off).enumerate() {
                    let child = children[c];
                    let keep = child.value + keep_pen;
                    let drop = child.energy + child_drop;
                    if keep < drop {
                        keep_bits |= 1 << i;
                        value += keep;
                    } else {
                        value += drop;
                    }
                    energy += child.energy;
                }
            }
            NodeSolution {
                value,
                energy,
                keep_bits,
            }
        };
        solutions[j] = if len >= PAR_LEVEL_LEN {
            (0..len).into_par_iter().map(solve).collect()
        } else {
            (0..len).map(solve).collect()
        };
    }

    let objective = solutions[0][0].value;
    let mut mask = SubtreeMask::root_only(dim, j_max);
    for j in 0..j_max {
        for off in 0..tree.level_len(j) {
            if !mask.is_chosen(j, off) {
                continue;
            }
            let bits = solutions[j][off].keep_bits;
            for (i, c) in tree.child_offsets(j, off).enumerate() {
                if bits & (1 << i) != 0 {
                    mask.set(j + 1, c, true);
                }
            }
        }
    }

    let mut coeffs_hat = CoeffPyramid::zeros(dim, j_max);
    coeffs_hat.set_approx(coeffs.approx());
    for j in 0..=j_max {
        let len = tree.level_len(j);
        let src = coeffs.level(j);
        let dst = coeffs_hat.level_mut(j);
        for off in (0..len).filter(|&o| mask.is_chosen(j, o)) {
            for l in 0..dim.subbands() {
                dst[l * len + off] = prior.node_cost(src[l * len + off]).1;
            }
        }
    }

    Ok(MapEstimate {
        mask,
        coeffs_hat,
        objective,
    })
}

/// Negative log posterior at `(g, t)`, evaluated node by node.
pub fn objective_value(
    m: &CoeffPyramid,
    mask: &SubtreeMask,
    g: &CoeffPyramid,
    config: &DenoiseConfig,
) -> Result<f64> {
    config.validate()?;
    mask.check_proper()?;
    if m.dim() != mask.dim()
        || g.dim() != mask.dim()
        || m.j_max() != mask.j_max()
        || g.j_max() != mask.j_max()
    {
        return Err(Error::structure("measurement, estimate and mask shapes differ"));
    }
    let tree = mask.tree();
    let ln_beta = config.beta.ln();
    let ln_off = (1.0 - config.beta).ln();
    let mut total = 0.0;
    for j in 0..=tree.j_max {
        for off in 0..tree.level_len(j) {
            let chosen = mask.is_chosen(j, off);
            let mut node = 0.0;
            for (mv, gv) in m.node_values(j, off).zip(g.node_values(j, off)) {
                if !chosen && gv != 0.0 {
                    return Err(Error::Invariant(format!(
                        "estimate is nonzero off the tree at {:?}",
                        tree.node(j, off)
                    )));
                }
                node += 0.5 * (mv - gv).powi(2) + config.prior.penalty(gv);
            }
            if j > 0 {
                node -= if chosen { ln_beta } else { ln_off };
            }
            total += node;
        }
    }
    Ok(total)
}

/// `||m restricted to the full subtree at node||^2`.
pub fn subtree_energy(m: &CoeffPyramid, node: NodeIndex) -> Result<f64> {
    let tree = EntireTree::new(m.dim(), m.j_max());
    if !tree.contains(node) {
        return Err(Error::param(format!("node {node:?} is not in the tree")));
    }
    Ok(tree
        .subtree_offsets(node)
        .iter()
        .map(|(j, offs)| offs.iter().map(|&o| m.node_values(*j, o).map(|v| v * v).sum::<f64>()).sum::<f64>())
        .sum())
}

/// `min{log(1/beta - 1), 1}`: subtrees with energy below any `eps` under
/// this bound are never part of the MAP tree.
pub fn lemma_epsilon_bound(beta: f64) -> f64 {
    (1.0 / beta - 1.0).ln().min(1.0)
}

/// Whether the subtree at `node` is small enough that the MAP tree must
/// exclude it: `||m|_T(node)||^2 < eps` with `0 < eps < min{log(1/beta-1), 1}`.
///
/// Requires `beta < 1/2`. The root is always part of the tree, so it cannot
/// be flagged and is rejected as an argument.
pub fn lemma_bound_check(
    m: &CoeffPyramid,
    node: NodeIndex,
    config: &DenoiseConfig,
    eps: f64,
) -> Result<bool> {
    config.validate()?;
    if config.beta >= 0.5 {
        return Err(Error::param(format!(
            "the subtree exclusion bound needs beta < 1/2, got {}",
            config.beta
        )));
    }
    let bound = lemma_epsilon_bound(config.beta);
    if !(eps > 0.0 && eps < bound) {
        return Err(Error::param(format!("eps must lie in (0, {bound}), got {eps}")));
    }
    if node.is_root() {
        return Err(Error::param("the root node is always kept"));
    }
    Ok(subtree_energy(m, node)? < eps)
}

/// How the noise level of the input is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseLevel {
    Known(f64),
    /// Median absolute finest-level detail divided by 0.6745.
    Auto,
}

/// Robust noise estimate from the finest detail level (all subbands).
pub fn estimate_noise_sigma(coeffs: &CoeffPyramid) -> f64 {
    let mut abs: Vec<f64> = coeffs.level(coeffs.j_max()).iter().map(|v| v.abs()).collect();
    abs.sort_by(|a, b| a.total_cmp(b));
    let n = abs.len();
    let median = if n % 2 == 1 {
        abs[n / 2]
    } else {
        0.5 * (abs[n / 2 - 1] + abs[n / 2])
    };
    median / 0.6745
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenoiseResult {
    pub mask: SubtreeMask,
    /// Estimated coefficients in data units.
    pub coeffs_hat: CoeffPyramid,
    /// Objective of the unit-noise problem.
    pub objective: f64,
    pub reconstruction: Field,
    pub noise_sigma: f64,
}

/// Transform, standardise by the noise level, solve, rescale, synthesise.
/// Input must already be dyadic; see [`denoise_any_size`] otherwise.
pub fn denoise(input: &Field, config: &DenoiseConfig, noise: NoiseLevel) -> Result<DenoiseResult> {
    config.validate()?;
    if input.dim() != config.dim {
        return Err(Error::param("input dimension does not match the configuration"));
    }
    let coeffs = forward(input, &config.family)?;
    let noise_sigma = match noise {
        NoiseLevel::Known(s) => s,
        NoiseLevel::Auto => estimate_noise_sigma(&coeffs),
    };
    if !(noise_sigma > 0.0 && noise_sigma.is_finite()) {
        return Err(Error::param(format!("noise sigma must be > 0, got {noise_sigma}")));
    }
    let scaled = coeffs.map_details(|v| v / noise_sigma);
    let est = dp_map(&scaled, config)?;
    let mut coeffs_hat = est.coeffs_hat.map_details(|v| v * noise_sigma);
    coeffs_hat.set_approx(coeffs.approx());
    let reconstruction = inverse(&coeffs_hat, &config.family)?;
    Ok(DenoiseResult {
        mask: est.mask,
        coeffs_hat,
        objective: est.objective,
        reconstruction,
        noise_sigma,
    })
}

/// Mirror-extends to the next dyadic (square) size, denoises, and crops back.
pub fn denoise_any_size(
    input: &Field,
    config: &DenoiseConfig,
    noise: NoiseLevel,
) -> Result<DenoiseResult> {
    use crate::wavelet::{crop, crop_2d, mirror_extend, mirror_extend_2d, next_dyadic_len};
    match input {
        Field::Signal(x) => {
            let target = next_dyadic_len(x.len());
            if target == x.len() {
                return denoise(input, config, noise);
            }
            let ext = Field::Signal(mirror_extend(x, target)?);
            let mut res = denoise(&ext, config, noise)?;
            res.reconstruction = Field::Signal(crop(res.reconstruction.values(), x.len())?);
            Ok(res)
        }
        Field::Image(im) => {
            let target = next_dyadic_len(im.rows().max(im.cols()));
            if target == im.rows() && target == im.cols() {
                return denoise(input, config, noise);
            }
            let ext = Field::Image(mirror_extend_2d(im, target)?);
            let mut res = denoise(&ext, config, noise)?;
            let full = res.reconstruction.as_image().expect("2D reconstruction");
            res.reconstruction = Field::Image(crop_2d(full, im.rows(), im.cols())?);
            Ok(res)
        }
    }
}

/// Coefficientwise thresholding baselines.
pub mod baseline {
    use super::*;

    #[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
    #[serde(rename_all = "lowercase")]
    pub enum Rule {
        Hard,
        Soft,
    }

    /// `sigma * sqrt(2 ln n)`.
    pub fn universal_threshold(sigma: f64, n: usize) -> f64 {
        sigma * (2.0 * (n as f64).ln()).sqrt()
    }

    pub fn hard(v: f64, thr: f64) -> f64 {
        if v.abs() > thr {
            v
        } else {
            0.0
        }
    }

    pub fn soft(v: f64, thr: f64) -> f64 {
        node_cost_laplace(v, thr).1
    }

    /// Thresholds every detail coefficient; the approximation is untouched.
    pub fn threshold_coeffs(coeffs: &CoeffPyramid, thr: f64, rule: Rule) -> CoeffPyramid {
        match rule {
            Rule::Hard => coeffs.map_details(|v| hard(v, thr)),
            Rule::Soft => coeffs.map_details(|v| soft(v, thr)),
        }
    }

    pub fn threshold_denoise(
        input: &Field,
        family: &WaveletFamily,
        thr: f64,
        rule: Rule,
    ) -> Result<Field> {
        let coeffs = forward(input, family)?;
        inverse(&threshold_coeffs(&coeffs, thr, rule), family)
    }
}
