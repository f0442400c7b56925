//! Orthonormal periodic discrete wavelet transforms.
//!
//! Signals of length `2^(j_max+1)` (and square images of that side) are
//! decomposed all the way down to a single approximation coefficient, so the
//! detail coefficients form a complete tree rooted at node `(0, 0)`:
//! level `j` holds `(2^d - 1) * 2^(j d)` values.
//!
//! Convolution is circular. Boundary handling by reflection is a separate,
//! explicit step ([`mirror_extend`], [`crop`]) applied before analysis and
//! undone after synthesis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::Dim;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaveletKind {
    Haar,
    #[serde(rename = "db2")]
    Daubechies2,
}

/// Quadrature-mirror filter pair of an orthonormal wavelet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "WaveletKind", into = "WaveletKind")]
pub struct WaveletFamily {
    kind: WaveletKind,
    low: Vec<f64>,
    high: Vec<f64>,
}

impl WaveletFamily {
    pub fn new(kind: WaveletKind) -> Self {
        let low = match kind {
            WaveletKind::Haar => vec![std::f64::consts::FRAC_1_SQRT_2; 2],
            WaveletKind::Daubechies2 => {
                let r3 = 3f64.sqrt();
                let norm = 4.0 * std::f64::consts::SQRT_2;
                vec![
                    (1.0 + r3) / norm,
                    (3.0 + r3) / norm,
                    (3.0 - r3) / norm,
                    (1.0 - r3) / norm,
                ]
            }
        };
        // high[n] = (-1)^n low[L-1-n]
        let len = low.len();
        let high = (0..len)
            .map(|n| {
                let v = low[len - 1 - n];
                if n % 2 == 0 {
                    v
                } else {
                    -v
                }
            })
            .collect();
        Self { kind, low, high }
    }

    pub fn haar() -> Self {
        Self::new(WaveletKind::Haar)
    }

    pub fn daubechies2() -> Self {
        Self::new(WaveletKind::Daubechies2)
    }

    /// Accepts `haar`, `db1`, `db2` and `daubechies2` (case-insensitive).
    pub fn from_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "haar" | "db1" => Ok(Self::haar()),
            "db2" | "daubechies2" | "daubechies-2" => Ok(Self::daubechies2()),
            other => Err(Error::param(format!(
                "unknown wavelet family '{other}' (expected haar or db2)"
            ))),
        }
    }

    pub fn kind(&self) -> WaveletKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            WaveletKind::Haar => "haar",
            WaveletKind::Daubechies2 => "db2",
        }
    }

    pub fn low_pass(&self) -> &[f64] {
        &self.low
    }

    pub fn high_pass(&self) -> &[f64] {
        &self.high
    }

    pub fn support_length(&self) -> usize {
        self.low.len()
    }

    /// One analysis stage: `input` (even length) into approximation and
    /// detail halves.
    fn analyze(&self, input: &[f64], approx: &mut [f64], detail: &mut [f64]) {
        let n = input.len();
        let half = n / 2;
        for i in 0..half {
            let mut a = 0.0;
            let mut d = 0.0;
            for (tap, (&lo, &hi)) in self.low.iter().zip(&self.high).enumerate() {
                let x = input[(2 * i + tap) % n];
                a += lo * x;
                d += hi * x;
            }
            approx[i] = a;
            detail[i] = d;
        }
    }

    /// Adjoint of [`Self::analyze`]; `output` is overwritten.
    fn synthesize(&self, approx: &[f64], detail: &[f64], output: &mut [f64]) {
        let n = output.len();
        output.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..approx.len() {
            let (a, d) = (approx[i], detail[i]);
            for (tap, (&lo, &hi)) in self.low.iter().zip(&self.high).enumerate() {
                output[(2 * i + tap) % n] += lo * a + hi * d;
            }
        }
    }
}

impl From<WaveletKind> for WaveletFamily {
    fn from(kind: WaveletKind) -> Self {
        Self::new(kind)
    }
}

impl From<WaveletFamily> for WaveletKind {
    fn from(family: WaveletFamily) -> Self {
        family.kind
    }
}

/// Dense row-major real matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Image {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Image {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows.checked_mul(cols) != Some(data.len()) {
            return Err(Error::structure(format!(
                "image {rows}x{cols} needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }
}

/// A 1D signal or a 2D image.
#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Signal(Vec<f64>),
    Image(Image),
}

impl Field {
    pub fn dim(&self) -> Dim {
        match self {
            Field::Signal(_) => Dim::One,
            Field::Image(_) => Dim::Two,
        }
    }

    pub fn values(&self) -> &[f64] {
        match self {
            Field::Signal(v) => v,
            Field::Image(im) => im.data(),
        }
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        match self {
            Field::Signal(v) => v,
            Field::Image(im) => im.data_mut(),
        }
    }

    pub fn len(&self) -> usize {
        self.values().len()
    }

    pub fn is_empty(&self) -> bool {
        self.values().is_empty()
    }

    pub fn as_signal(&self) -> Option<&[f64]> {
        match self {
            Field::Signal(v) => Some(v),
            Field::Image(_) => None,
        }
    }

    pub fn as_image(&self) -> Option<&Image> {
        match self {
            Field::Image(im) => Some(im),
            Field::Signal(_) => None,
        }
    }
}

/// Complete multiresolution coefficient set.
///
/// Detail level `j` is stored subband-major: entry `(l, k)` lives at index
/// `(l - 1) * 2^(j d) + offset(k)`, where `offset` is the row-major position
/// of `k` within the level (see [`crate::tree::EntireTree::offset`]).
/// In 2D the subbands are `1 = HL` (horizontal detail), `2 = LH`, `3 = HH`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffPyramid {
    dim: Dim,
    j_max: usize,
    approx: f64,
    levels: Vec<Vec<f64>>,
}

impl CoeffPyramid {
    pub fn zeros(dim: Dim, j_max: usize) -> Self {
        let levels = (0..=j_max)
            .map(|j| vec![0.0; dim.subbands() * dim.level_len(j)])
            .collect();
        Self {
            dim,
            j_max,
            approx: 0.0,
            levels,
        }
    }

    /// Builds a pyramid from raw parts, checking every level size.
    pub fn from_parts(dim: Dim, j_max: usize, approx: f64, levels: Vec<Vec<f64>>) -> Result<Self> {
        let pyramid = Self {
            dim,
            j_max,
            approx,
            levels,
        };
        pyramid.validate()?;
        Ok(pyramid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels.len() != self.j_max + 1 {
            return Err(Error::structure(format!(
                "pyramid with j_max={} needs {} detail levels, found {}",
                self.j_max,
                self.j_max + 1,
                self.levels.len()
            )));
        }
        for (j, level) in self.levels.iter().enumerate() {
            let want = self.dim.subbands() * self.dim.level_len(j);
            if level.len() != want {
                return Err(Error::structure(format!(
                    "detail level {j} holds {} coefficients, expected {want}",
                    level.len()
                )));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn j_max(&self) -> usize {
        self.j_max
    }

    /// Samples per axis of the grid this pyramid synthesises to.
    pub fn side_len(&self) -> usize {
        1 << (self.j_max + 1)
    }

    pub fn approx(&self) -> f64 {
        self.approx
    }

    pub fn set_approx(&mut self, value: f64) {
        self.approx = value;
    }

    pub fn level(&self, j: usize) -> &[f64] {
        &self.levels[j]
    }

    pub fn level_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.levels[j]
    }

    pub fn levels(&self) -> &[Vec<f64>] {
        &self.levels
    }

    #[inline]
    fn index(&self, j: usize, subband: usize, offset: usize) -> usize {
        debug_assert!(subband >= 1 && subband <= self.dim.subbands());
        (subband - 1) * self.dim.level_len(j) + offset
    }

    /// Detail coefficient at level `j`, subband `subband` (1-based), node
    /// offset `offset`.
    pub fn detail(&self, j: usize, subband: usize, offset: usize) -> f64 {
        self.levels[j][self.index(j, subband, offset)]
    }

    pub fn set_detail(&mut self, j: usize, subband: usize, offset: usize, value: f64) {
        let idx = self.index(j, subband, offset);
        self.levels[j][idx] = value;
    }

    /// All subband values of one node, in subband order.
    pub fn node_values(&self, j: usize, offset: usize) -> impl Iterator<Item = f64> + '_ {
        let stride = self.dim.level_len(j);
        let level = &self.levels[j];
        (0..self.dim.subbands()).map(move |l| level[l * stride + offset])
    }

    /// Sum of squares of every coefficient, approximation included.
    pub fn energy(&self) -> f64 {
        self.approx * self.approx
            + self
                .levels
                .iter()
                .flat_map(|l| l.iter())
                .map(|v| v * v)
                .sum::<f64>()
    }

    /// Applies `f` to every detail coefficient.
    pub fn map_details(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        let mut out = self.clone();
        for level in &mut out.levels {
            for v in level.iter_mut() {
                *v = f(*v);
            }
        }
        out
    }

    /// `self * a + other * b`, coefficientwise.
    pub fn axpby(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if self.dim != other.dim || self.j_max != other.j_max {
            return Err(Error::structure("pyramids of different shape"));
        }
        let mut out = self.clone();
        out.approx = a * self.approx + b * other.approx;
        for (lo, li) in out.levels.iter_mut().zip(&other.levels) {
            for (v, w) in lo.iter_mut().zip(li) {
                *v = a * *v + b * w;
            }
        }
        Ok(out)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut m = (self.approx - other.approx).abs();
        for (a, b) in self.levels.iter().zip(&other.levels) {
            for (x, y) in a.iter().zip(b) {
                m = m.max((x - y).abs());
            }
        }
        m
    }
}

/// `log2(n)` when `n` is a power of two `>= 2`.
fn dyadic_depth(n: usize) -> Option<usize> {
    (n >= 2 && n.is_power_of_two()).then(|| n.trailing_zeros() as usize)
}

/// Smallest power of two `>= max(n, 2)`.
pub fn next_dyadic_len(n: usize) -> usize {
    n.max(2).next_power_of_two()
}

pub fn forward_dwt(signal: &[f64], family: &WaveletFamily) -> Result<CoeffPyramid> {
    let n = signal.len();
    let depth = dyadic_depth(n).ok_or_else(|| Error::Sizing {
        what: format!("signal length {n} is not a power of two >= 2"),
        required: next_dyadic_len(n),
    })?;
    let j_max = depth - 1;
    let mut pyramid = CoeffPyramid::zeros(Dim::One, j_max);
    let mut current = signal.to_vec();
    let mut approx = vec![0.0; n / 2];
    for j in (0..=j_max).rev() {
        let half = current.len() / 2;
        family.analyze(&current, &mut approx[..half], &mut pyramid.levels[j]);
        current.truncate(half);
        current.copy_from_slice(&approx[..half]);
    }
    pyramid.approx = current[0];
    Ok(pyramid)
}

pub fn inverse_dwt(coeffs: &CoeffPyramid, family: &WaveletFamily) -> Result<Vec<f64>> {
    coeffs.validate()?;
    if coeffs.dim != Dim::One {
        return Err(Error::structure("inverse_dwt needs a 1D pyramid"));
    }
    let n = coeffs.side_len();
    let mut current = Vec::with_capacity(n);
    current.push(coeffs.approx);
    let mut next = vec![0.0; n];
    for j in 0..=coeffs.j_max {
        let len = 2 * current.len();
        family.synthesize(&current, &coeffs.levels[j], &mut next[..len]);
        current.clear();
        current.extend_from_slice(&next[..len]);
    }
    Ok(current)
}

pub fn forward_dwt_2d(image: &Image, family: &WaveletFamily) -> Result<CoeffPyramid> {
    let (rows, cols) = (image.rows, image.cols);
    let side = rows.max(cols);
    let depth = match dyadic_depth(rows) {
        Some(d) if rows == cols => d,
        _ => {
            return Err(Error::Sizing {
                what: format!("image {rows}x{cols} is not square with power-of-two side >= 2"),
                required: next_dyadic_len(side),
            })
        }
    };
    let j_max = depth - 1;
    let mut pyramid = CoeffPyramid::zeros(Dim::Two, j_max);
    let mut work = image.data.clone();
    let stride = side;
    let mut line = vec![0.0; side];
    let mut lo = vec![0.0; side / 2];
    let mut hi = vec![0.0; side / 2];

    let mut n = side;
    for j in (0..=j_max).rev() {
        let half = n / 2;
        // rows
        for r in 0..n {
            let row = &mut work[r * stride..r * stride + n];
            family.analyze(row, &mut lo[..half], &mut hi[..half]);
            row[..half].copy_from_slice(&lo[..half]);
            row[half..n].copy_from_slice(&hi[..half]);
        }
        // columns
        for c in 0..n {
            for r in 0..n {
                line[r] = work[r * stride + c];
            }
            family.analyze(&line[..n], &mut lo[..half], &mut hi[..half]);
            for r in 0..half {
                work[r * stride + c] = lo[r];
                work[(r + half) * stride + c] = hi[r];
            }
        }
        let level = &mut pyramid.levels[j];
        let q = half * half;
        for r in 0..half {
            for c in 0..half {
                let off = r * half + c;
                level[off] = work[r * stride + c + half];
                level[q + off] = work[(r + half) * stride + c];
                level[2 * q + off] = work[(r + half) * stride + c + half];
            }
        }
        n = half;
    }
    pyramid.approx = work[0];
    Ok(pyramid)
}

pub fn inverse_dwt_2d(coeffs: &CoeffPyramid, family: &WaveletFamily) -> Result<Image> {
    coeffs.validate()?;
    if coeffs.dim != Dim::Two {
        return Err(Error::structure("inverse_dwt_2d needs a 2D pyramid"));
    }
    let side = coeffs.side_len();
    let stride = side;
    let mut work = vec![0.0; side * side];
    work[0] = coeffs.approx;
    let mut line = vec![0.0; side];
    let mut lo = vec![0.0; side / 2];
    let mut hi = vec![0.0; side / 2];

    for j in 0..=coeffs.j_max {
        let half = 1usize << j;
        let n = 2 * half;
        let level = &coeffs.levels[j];
        let q = half * half;
        for r in 0..half {
            for c in 0..half {
                let off = r * half + c;
                work[r * stride + c + half] = level[off];
                work[(r + half) * stride + c] = level[q + off];
                work[(r + half) * stride + c + half] = level[2 * q + off];
            }
        }
        for c in 0..n {
            for r in 0..half {
                lo[r] = work[r * stride + c];
                hi[r] = work[(r + half) * stride + c];
            }
            family.synthesize(&lo[..half], &hi[..half], &mut line[..n]);
            for r in 0..n {
                work[r * stride + c] = line[r];
            }
        }
        for r in 0..n {
            let row = &mut work[r * stride..r * stride + n];
            lo[..half].copy_from_slice(&row[..half]);
            hi[..half].copy_from_slice(&row[half..n]);
            family.synthesize(&lo[..half], &hi[..half], row);
        }
    }
    Image::new(side, side, work)
}

/// Forward transform of either field kind.
pub fn forward(field: &Field, family: &WaveletFamily) -> Result<CoeffPyramid> {
    match field {
        Field::Signal(s) => forward_dwt(s, family),
        Field::Image(im) => forward_dwt_2d(im, family),
    }
}

/// Inverse transform matching the pyramid's dimension.
pub fn inverse(coeffs: &CoeffPyramid, family: &WaveletFamily) -> Result<Field> {
    match coeffs.dim {
        Dim::One => inverse_dwt(coeffs, family).map(Field::Signal),
        Dim::Two => inverse_dwt_2d(coeffs, family).map(Field::Image),
    }
}

/// Index into a length-`n` sequence under whole-sample symmetric reflection
/// (`... 2 1 | 0 1 2 ... n-1 | n-2 n-3 ...`).
fn reflect_index(i: usize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n - 1);
    let r = i % period;
    if r < n {
        r
    } else {
        period - r
    }
}

fn check_extension(len: usize, target: usize) -> Result<()> {
    if len == 0 {
        return Err(Error::Sizing {
            what: "cannot extend an empty input".into(),
            required: 2,
        });
    }
    if target < len {
        return Err(Error::Sizing {
            what: format!("target length {target} is smaller than input length {len}"),
            required: next_dyadic_len(len),
        });
    }
    if !target.is_power_of_two() {
        return Err(Error::Sizing {
            what: format!("target length {target} is not a power of two"),
            required: next_dyadic_len(target),
        });
    }
    Ok(())
}

/// Reflection-pads `signal` to `target` samples without repeating edge
/// samples: `[1, 2, 3] -> [1, 2, 3, 2]`.
pub fn mirror_extend(signal: &[f64], target: usize) -> Result<Vec<f64>> {
    check_extension(signal.len(), target)?;
    let n = signal.len();
    Ok((0..target).map(|i| signal[reflect_index(i, n)]).collect())
}

/// Keeps the first `len` samples.
pub fn crop(signal: &[f64], len: usize) -> Result<Vec<f64>> {
    if len > signal.len() {
        return Err(Error::Sizing {
            what: format!("cannot crop {} samples to {len}", signal.len()),
            required: len,
        });
    }
    Ok(signal[..len].to_vec())
}

/// Reflection-pads an image to `target x target`.
pub fn mirror_extend_2d(image: &Image, target: usize) -> Result<Image> {
    check_extension(image.rows, target)?;
    check_extension(image.cols, target)?;
    let (rows, cols) = (image.rows, image.cols);
    Ok(Image::from_fn(target, target, |r, c| {
        image.get(reflect_index(r, rows), reflect_index(c, cols))
    }))
}

/// Top-left `rows x cols` block.
pub fn crop_2d(image: &Image, rows: usize, cols: usize) -> Result<Image> {
    if rows > image.rows || cols > image.cols {
        return Err(Error::Sizing {
            what: format!(
                "cannot crop {}x{} image to {rows}x{cols}",
                image.rows, image.cols
            ),
            required: rows.max(cols),
        });
    }
    Ok(Image::from_fn(rows, cols, |r, c| image.get(r, c)))
}
