//! Finite wavelet trees and their random proper subtrees.
//!
//! Nodes `(j, k)` with `0 <= j <= j_max` and `k in {0..2^j-1}^d`. Within a
//! level a node is addressed by its row-major *offset*: `k` in 1D and
//! `k_row * 2^j + k_col` in 2D. Masks are stored level-major as dense
//! booleans.

use rand::Rng as _;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, Rng};

/// Default cap for [`enumerate_proper_subtrees`].
pub const DEFAULT_ENUMERATION_CAP: u64 = 1_000_000;

/// Spatial dimension of the tree (1 = binary tree, 2 = quadtree).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub enum Dim {
    One,
    Two,
}

impl Dim {
    pub fn from_d(d: u32) -> Result<Self> {
        match d {
            1 => Ok(Dim::One),
            2 => Ok(Dim::Two),
            other => Err(Error::param(format!("dimension must be 1 or 2, got {other}"))),
        }
    }

    pub fn d(self) -> u32 {
        match self {
            Dim::One => 1,
            Dim::Two => 2,
        }
    }

    /// `2^d`
    pub fn children(self) -> usize {
        1 << self.d()
    }

    /// `2^d - 1` wavelet subbands per node.
    pub fn subbands(self) -> usize {
        self.children() - 1
    }

    /// Nodes at level `j`: `2^(j d)`.
    pub fn level_len(self, j: usize) -> usize {
        1 << (j * self.d() as usize)
    }
}

impl TryFrom<u32> for Dim {
    type Error = Error;
    fn try_from(d: u32) -> Result<Self> {
        Dim::from_d(d)
    }
}

impl From<Dim> for u32 {
    fn from(d: Dim) -> u32 {
        d.d()
    }
}

/// Tree node `(j, k)`. In 1D only `pos[0]` is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeIndex {
    pub level: usize,
    pub pos: [usize; 2],
}

impl NodeIndex {
    pub const ROOT: NodeIndex = NodeIndex {
        level: 0,
        pos: [0, 0],
    };

    pub fn new_1d(level: usize, k: usize) -> Self {
        Self { level, pos: [k, 0] }
    }

    pub fn new_2d(level: usize, row: usize, col: usize) -> Self {
        Self {
            level,
            pos: [row, col],
        }
    }

    pub fn is_root(&self) -> bool {
        self.level == 0
    }

    /// `(j-1, floor(k/2))`, or `None` at the root.
    pub fn parent(&self) -> Option<Self> {
        (self.level > 0).then(|| Self {
            level: self.level - 1,
            pos: [self.pos[0] / 2, self.pos[1] / 2],
        })
    }

    /// The `2^d` children `(j+1, 2k + e)`, `e in {0,1}^d`.
    pub fn children(&self, dim: Dim) -> Vec<Self> {
        let [a, b] = self.pos;
        match dim {
            Dim::One => vec![Self::new_1d(self.level + 1, 2 * a), Self::new_1d(self.level + 1, 2 * a + 1)],
            Dim::Two => (0..4)
                .map(|e| Self::new_2d(self.level + 1, 2 * a + e / 2, 2 * b + e % 2))
                .collect(),
        }
    }
}

/// The complete tree of depth `j_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EntireTree {
    pub dim: Dim,
    pub j_max: usize,
}

impl EntireTree {
    pub fn new(dim: Dim, j_max: usize) -> Self {
        Self { dim, j_max }
    }

    pub fn level_len(&self, j: usize) -> usize {
        self.dim.level_len(j)
    }

    pub fn node_count(&self) -> usize {
        (0..=self.j_max).map(|j| self.level_len(j)).sum()
    }

    /// Row-major offset of `node` within its level.
    pub fn offset(&self, node: NodeIndex) -> usize {
        match self.dim {
            Dim::One => node.pos[0],
            Dim::Two => node.pos[0] * (1 << node.level) + node.pos[1],
        }
    }

    pub fn node(&self, level: usize, offset: usize) -> NodeIndex {
        match self.dim {
            Dim::One => NodeIndex::new_1d(level, offset),
            Dim::Two => NodeIndex::new_2d(level, offset >> level, offset & ((1 << level) - 1)),
        }
    }

    pub fn contains(&self, node: NodeIndex) -> bool {
        let side = 1usize << node.level;
        node.level <= self.j_max
            && node.pos[0] < side
            && match self.dim {
                Dim::One => node.pos[1] == 0,
                Dim::Two => node.pos[1] < side,
            }
    }

    /// Offset of the parent of the node at `(level, offset)`, `level >= 1`.
    #[inline]
    pub fn parent_offset(&self, level: usize, offset: usize) -> usize {
        match self.dim {
            Dim::One => offset / 2,
            Dim::Two => {
                let side = 1usize << level;
                let (r, c) = (offset / side, offset % side);
                (r / 2) * (side / 2) + c / 2
            }
        }
    }

    /// Offsets at `level + 1` of the children of `(level, offset)`.
    #[inline]
    pub fn child_offsets(&self, level: usize, offset: usize) -> impl Iterator<Item = usize> {
        let dim = self.dim;
        let side = 1usize << level;
        (0..dim.children()).map(move |e| match dim {
            Dim::One => 2 * offset + e,
            Dim::Two => {
                let (r, c) = (offset / side, offset % side);
                (2 * r + e / 2) * (2 * side) + 2 * c + e % 2
            }
        })
    }

    /// Nodes in the full subtree rooted at level `j`.
    pub fn subtree_size(&self, j: usize) -> usize {
        (0..=self.j_max - j).map(|i| self.level_len(i)).sum()
    }

    /// Every node of the subtree rooted at `node`, grouped as
    /// `(level, offsets)` from `node.level` down to `j_max`.
    pub fn subtree_offsets(&self, node: NodeIndex) -> Vec<(usize, Vec<usize>)> {
        let mut out = Vec::with_capacity(self.j_max + 1 - node.level);
        let mut current = vec![self.offset(node)];
        for level in node.level..=self.j_max {
            let next: Vec<usize> = if level < self.j_max {
                current
                    .iter()
                    .flat_map(|&o| self.child_offsets(level, o))
                    .collect()
            } else {
                Vec::new()
            };
            out.push((level, std::mem::replace(&mut current, next)));
        }
        out
    }
}

/// Number of nodes in a full subtree rooted at level `j`:
/// `sum_{i=0}^{j_max-j} 2^(i d)`; `2^(j_max-j+1) - 1` in 1D.
pub fn subtree_size(j: usize, j_max: usize, dim: Dim) -> Result<usize> {
    if j > j_max {
        return Err(Error::param(format!("level {j} exceeds j_max {j_max}")));
    }
    Ok(EntireTree::new(dim, j_max).subtree_size(j))
}

/// Probability `beta^j` that node `(j, k)` is in a sampled tree.
pub fn inclusion_probability(j: usize, beta: f64) -> f64 {
    beta.powi(j as i32)
}

/// A proper subtree: root always present, closed under taking parents.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubtreeMask {
    dim: Dim,
    j_max: usize,
    levels: Vec<Vec<bool>>,
}

impl SubtreeMask {
    pub fn root_only(dim: Dim, j_max: usize) -> Self {
        let mut levels: Vec<Vec<bool>> = (0..=j_max).map(|j| vec![false; dim.level_len(j)]).collect();
        levels[0][0] = true;
        Self { dim, j_max, levels }
    }

    pub fn full(dim: Dim, j_max: usize) -> Self {
        let levels = (0..=j_max).map(|j| vec![true; dim.level_len(j)]).collect();
        Self { dim, j_max, levels }
    }

    /// Shape-checked but *not* properness-checked. Use [`Self::check_proper`]
    /// or [`Self::from_levels`] before trusting the result.
    pub fn from_raw_levels(dim: Dim, j_max: usize, levels: Vec<Vec<bool>>) -> Result<Self> {
        if levels.len() != j_max + 1 {
            return Err(Error::structure(format!(
                "mask with j_max={j_max} needs {} levels, got {}",
                j_max + 1,
                levels.len()
            )));
        }
        for (j, level) in levels.iter().enumerate() {
            if level.len() != dim.level_len(j) {
                return Err(Error::structure(format!(
                    "mask level {j} has {} entries, expected {}",
                    level.len(),
                    dim.level_len(j)
                )));
            }
        }
        Ok(Self { dim, j_max, levels })
    }

    pub fn from_levels(dim: Dim, j_max: usize, levels: Vec<Vec<bool>>) -> Result<Self> {
        let mask = Self::from_raw_levels(dim, j_max, levels)?;
        mask.check_proper()?;
        Ok(mask)
    }

    pub fn check_proper(&self) -> Result<()> {
        if !self.levels[0][0] {
            return Err(Error::Invariant("root (0,0) is not chosen".into()));
        }
        let tree = self.tree();
        for j in 1..=self.j_max {
            for (off, &on) in self.levels[j].iter().enumerate() {
                if on && !self.levels[j - 1][tree.parent_offset(j, off)] {
                    return Err(Error::Invariant(format!(
                        "node {:?} is chosen but its parent is not",
                        tree.node(j, off)
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn is_proper(&self) -> bool {
        self.check_proper().is_ok()
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn j_max(&self) -> usize {
        self.j_max
    }

    pub fn tree(&self) -> EntireTree {
        EntireTree::new(self.dim, self.j_max)
    }

    #[inline]
    pub fn is_chosen(&self, level: usize, offset: usize) -> bool {
        self.levels[level][offset]
    }

    pub fn contains(&self, node: NodeIndex) -> bool {
        let tree = self.tree();
        tree.contains(node) && self.levels[node.level][tree.offset(node)]
    }

    pub fn level(&self, j: usize) -> &[bool] {
        &self.levels[j]
    }

    /// Sets one node without checking properness.
    pub fn set(&mut self, level: usize, offset: usize, chosen: bool) {
        self.levels[level][offset] = chosen;
    }

    pub fn count(&self) -> usize {
        self.levels.iter().flatten().filter(|&&b| b).count()
    }

    /// `true` if any node of the full subtree rooted at `node` is chosen.
    pub fn intersects_subtree(&self, node: NodeIndex) -> bool {
        self.tree()
            .subtree_offsets(node)
            .iter()
            .any(|(level, offs)| offs.iter().any(|&o| self.levels[*level][o]))
    }

    /// Chosen nodes per level, `v(0..=j_max)`.
    pub fn level_counts(&self) -> Result<Vec<usize>> {
        self.check_proper()?;
        Ok(self
            .levels
            .iter()
            .map(|l| l.iter().filter(|&&b| b).count())
            .collect())
    }

    pub fn to_dump(&self) -> MaskDump {
        MaskDump {
            d: self.dim.d(),
            j_max: self.j_max,
            levels: self
                .levels
                .iter()
                .map(|l| l.iter().map(|&b| u8::from(b)).collect())
                .collect(),
        }
    }

    pub fn from_dump(dump: &MaskDump) -> Result<Self> {
        let dim = Dim::from_d(dump.d)?;
        let mut levels = Vec::with_capacity(dump.levels.len());
        for level in &dump.levels {
            let mut row = Vec::with_capacity(level.len());
            for &v in level {
                row.push(match v {
                    0 => false,
                    1 => true,
                    other => return Err(Error::structure(format!("mask entry {other} is not 0/1"))),
                });
            }
            levels.push(row);
        }
        Self::from_levels(dim, dump.j_max, levels)
    }
}

/// JSON form of a mask: `{"d": 1, "j_max": 2, "levels": [[1], [1, 0], [0, 0, 0, 0]]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskDump {
    pub d: u32,
    pub j_max: usize,
    pub levels: Vec<Vec<u8>>,
}

impl Serialize for SubtreeMask {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_dump().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SubtreeMask {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let dump = MaskDump::deserialize(d)?;
        SubtreeMask::from_dump(&dump).map_err(serde::de::Error::custom)
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta <= 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!("wavelet density beta must lie in (0, 1], got {beta}")))
    }
}

/// Galton–Watson tree: the root is kept and every child of a kept node is
/// kept independently with probability `beta`.
pub fn sample_tree(dim: Dim, j_max: usize, beta: f64, seed: u64) -> Result<SubtreeMask> {
    sample_tree_with(dim, j_max, beta, &mut rng_from_seed(seed))
}

pub fn sample_tree_with(dim: Dim, j_max: usize, beta: f64, rng: &mut Rng) -> Result<SubtreeMask> {
    check_beta(beta)?;
    let tree = EntireTree::new(dim, j_max);
    let mut mask = SubtreeMask::root_only(dim, j_max);
    let mut frontier = vec![0usize];
    for j in 0..j_max {
        let mut next = Vec::new();
        for &parent in &frontier {
            for child in tree.child_offsets(j, parent) {
                if rng.random::<f64>() < beta {
                    mask.levels[j + 1][child] = true;
                    next.push(child);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    Ok(mask)
}

/// Level sizes `v(0..=j_max)` of a sampled tree, drawn directly from the
/// branching recursion `v(j) ~ Binomial(2^d v(j-1), beta)`, `v(0) = 1`.
///
/// Same law as `sample_tree(..).level_counts()` but without materialising
/// the `2^(j d)`-wide levels.
pub fn sample_level_counts(dim: Dim, j_max: usize, beta: f64, rng: &mut Rng) -> Result<Vec<u64>> {
    check_beta(beta)?;
    let mut counts = Vec::with_capacity(j_max + 1);
    counts.push(1u64);
    let mut v = 1u64;
    for _ in 0..j_max {
        let trials = v.checked_mul(dim.children() as u64).ok_or_else(|| {
            Error::param(format!("level count overflow at depth {j_max}; reduce j_max"))
        })?;
        v = if trials == 0 {
            0
        } else if beta >= 1.0 {
            trials
        } else {
            Binomial::new(trials, beta)
                .map_err(|e| Error::param(e.to_string()))?
                .sample(rng)
        };
        counts.push(v);
    }
    Ok(counts)
}

/// Probability that the random tree is finite: the smallest fixed point of
/// `P = ((1 - beta) + beta P)^(2^d)` in `[0, 1]`.
///
/// Returns exactly 1 for `beta <= 2^-d`. Otherwise iterates from `P = 0`,
/// which increases monotonically to the minimal fixed point.
pub fn extinction_probability(dim: Dim, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let branching = dim.children() as i32;
    if beta * branching as f64 <= 1.0 {
        return Ok(1.0);
    }
    let mut p = 0.0f64;
    for _ in 0..1_000_000 {
        let next = ((1.0 - beta) + beta * p).powi(branching);
        let done = (next - p).abs() < 1e-12;
        p = next;
        if done {
            break;
        }
    }
    Ok(p)
}

/// `g(h) = (1 + g(h-1))^(2^d)`, `g(0) = 1`: number of proper subtrees of a
/// tree of depth `h`. `None` on overflow.
pub fn proper_subtree_count(dim: Dim, j_max: usize) -> Option<u128> {
    let mut g: u128 = 1;
    for _ in 0..j_max {
        g = (g + 1).checked_pow(dim.children() as u32)?;
    }
    Some(g)
}

/// Every proper subtree (root included), each exactly once.
pub fn enumerate_proper_subtrees(
    dim: Dim,
    j_max: usize,
    cap: u64,
) -> Result<std::vec::IntoIter<SubtreeMask>> {
    let count = proper_subtree_count(dim, j_max);
    match count {
        Some(c) if c <= cap as u128 => {}
        other => {
            return Err(Error::TooLarge {
                count: other.map_or_else(|| "more than 2^128".to_string(), |c| c.to_string()),
                cap,
            })
        }
    }
    let tree = EntireTree::new(dim, j_max);
    // non-root nodes in level order, with the flat index of their parent
    let mut nodes: Vec<(usize, usize, Option<usize>)> = Vec::new();
    let mut level_start = vec![0usize; j_max + 1];
    let mut flat = 1usize;
    for j in 1..=j_max {
        level_start[j] = flat;
        for off in 0..tree.level_len(j) {
            let p = tree.parent_offset(j, off);
            let parent_flat = if j == 1 { None } else { Some(level_start[j - 1] + p) };
            nodes.push((j, off, parent_flat));
            flat += 1;
        }
    }
    let mut out = Vec::with_capacity(count.unwrap_or(0) as usize);
    let mut state = vec![false; flat];
    state[0] = true;
    let mut mask = SubtreeMask::root_only(dim, j_max);
    enumerate_rec(&nodes, 0, &mut state, &mut mask, &mut out);
    Ok(out.into_iter())
}

fn enumerate_rec(
    nodes: &[(usize, usize, Option<usize>)],
    i: usize,
    state: &mut [bool],
    mask: &mut SubtreeMask,
    out: &mut Vec<SubtreeMask>,
) {
    if i == nodes.len() {
        out.push(mask.clone());
        return;
    }
    let (level, off, parent) = nodes[i];
    let parent_on = parent.map_or(true, |p| state[p]);
    // flat index of node i is i + 1 (root is 0)
    state[i + 1] = false;
    mask.levels[level][off] = false;
    enumerate_rec(nodes, i + 1, state, mask, out);
    if parent_on {
        state[i + 1] = true;
        mask.levels[level][off] = true;
        enumerate_rec(nodes, i + 1, state, mask, out);
        state[i + 1] = false;
        mask.levels[level][off] = false;
    }
}
