//! Random tree Besov priors on dyadic wavelet trees.
//!
//! The crate is organised bottom-up:
//!
//! * [`wavelet`]: orthonormal periodic Haar / Daubechies-2 transforms in one
//!   and two dimensions, addressed by tree node.
//! * [`tree`]: finite wavelet trees, proper subtrees, Galton–Watson sampling
//!   with wavelet density `beta` and its extinction probability.
//! * [`prior`]: draws from the (random tree) Besov prior with
//!   generalized-Gaussian coefficients, and discrete Besov norms.
//! * [`map_denoise`]: exact MAP estimation under the random tree prior by
//!   dynamic programming over the tree (pruning and tree-enforced soft
//!   thresholding), with classical thresholding baselines.
//! * [`analysis`]: Monte Carlo checks of extinction, fractal dimension and
//!   norm growth, plus reconstruction metrics.

pub mod analysis;
pub mod error;
pub mod fixtures;
pub mod map_denoise;
pub mod prior;
pub mod rng;
pub mod tree;
pub mod wavelet;

pub use error::{Error, Result};
pub use tree::{Dim, NodeIndex, SubtreeMask};
pub use wavelet::{CoeffPyramid, Field, Image, WaveletFamily};
