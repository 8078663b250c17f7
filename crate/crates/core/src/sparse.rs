//! Nested piecewise-linear sparse-grid interpolation on `[-1, 1]^r`.
//!
//! One-dimensional levels follow the standard nested hierarchy: level 1 is
//! the single node `{0}`, level `i >= 2` has `m_i = 2^(i-1) + 1` nodes with
//! either equidistant or Clenshaw-Curtis placement (`x_j = -cos(j pi / (m-1))`).
//! Both placements double the interval count per level, so the node sets are
//! nested and each level contributes `m_i - m_{i-1}` new nodes.
//!
//! The multivariate interpolant combines one-dimensional difference operators
//! over all level multi-indices `i` with `|i| <= q`:
//!
//! ```text
//! S_{q,r} = sum_{|i| <= q} (U^{i_1} - U^{i_1 - 1}) x ... x (U^{i_r} - U^{i_r - 1})
//! ```
//!
//! Each difference block is stored through hierarchical surpluses attached to
//! the nodes that are new at that block's levels, with hat functions spanning
//! the adjacent nodes of the same level. Every distinct grid node belongs to
//! exactly one block, so the training callable is evaluated exactly once per
//! node, and evaluation at any training node reproduces the training value.
//!
//! Vector-valued targets share the node set; surpluses are stored per output
//! channel, node-major.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// One-dimensional node placement rule.
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    /// Dyadically refined uniform nodes (default).
    Equidistant,
    /// Clenshaw-Curtis (cosine-spaced) nodes.
    ClenshawCurtis,
}

/// Number of nodes of the one-dimensional rule at `level >= 1`.
pub fn level_node_count(level: usize) -> usize {
    if level == 1 {
        1
    } else {
        (1usize << (level - 1)) + 1
    }
}

/// All nodes of the one-dimensional rule at `level`, ascending.
pub fn nodes_1d(level: usize, placement: Placement) -> Result<Vec<f64>> {
    if level == 0 {
        return Err(Error::InvalidConfig("level must be >= 1".into()));
    }
    if level == 1 {
        return Ok(vec![0.0]);
    }
    let intervals = 1usize << (level - 1);
    let m = intervals + 1;
    let mut nodes = vec![0.0; m];
    match placement {
        Placement::Equidistant => {
            let step = 2.0 / intervals as f64;
            for (j, n) in nodes.iter_mut().enumerate() {
                *n = -1.0 + j as f64 * step;
            }
        }
        Placement::ClenshawCurtis => {
            // Mirror the halves and pin the center so node coordinates are
            // bit-identical across nesting levels.
            for j in 0..=intervals / 2 {
                nodes[j] = -crate::fmath::cos(j as f64 * core::f64::consts::PI / intervals as f64);
            }
            nodes[intervals / 2] = 0.0;
            for j in intervals / 2 + 1..m {
                nodes[j] = -nodes[m - 1 - j];
            }
        }
    }
    Ok(nodes)
}

/// Plain one-dimensional piecewise-linear interpolation through
/// `(nodes, values)` pairs; exact at the nodes.
pub fn interp_1d(nodes: &[f64], values: &[f64], x: f64) -> Result<f64> {
    if nodes.len() != values.len() {
        return Err(Error::LengthMismatch {
            expected: nodes.len(),
            got: values.len(),
        });
    }
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::OutOfDomain {
            what: "x",
            value: x,
            lo: -1.0,
            hi: 1.0,
        });
    }
    if nodes.len() == 1 {
        return Ok(values[0]);
    }
    let i = nodes.partition_point(|&n| n <= x).saturating_sub(1);
    if nodes[i] == x {
        return Ok(values[i]);
    }
    let (x0, x1) = (nodes[i], nodes[i + 1]);
    let w = (x - x0) / (x1 - x0);
    Ok(values[i] + w * (values[i + 1] - values[i]))
}

/// A node that first appears at some level, with its hat support spanning the
/// adjacent nodes of that level.
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Debug, Clone, PartialEq)]
struct NewNode {
    x: f64,
    left: f64,
    right: f64,
}

impl NewNode {
    /// Hat value: 1 at the node, 0 at the support edges, 0 outside.
    #[inline]
    fn hat(&self, x: f64) -> f64 {
        if x == self.x {
            1.0
        } else if x < self.x {
            ((x - self.left) / (self.x - self.left)).max(0.0)
        } else {
            ((self.right - x) / (self.right - self.x)).max(0.0)
        }
    }
}

/// Per-level one-dimensional tables.
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Debug, Clone, PartialEq)]
struct Level1d {
    new_nodes: Vec<NewNode>,
}

fn build_levels(max_level: usize, placement: Placement) -> Result<Vec<Level1d>> {
    let mut levels = Vec::with_capacity(max_level);
    for level in 1..=max_level {
        let new_nodes = if level == 1 {
            // Root hat is the constant 1 on the whole interval; the support
            // fields are unused for level 1 but kept finite.
            vec![NewNode {
                x: 0.0,
                left: -1.0,
                right: 1.0,
            }]
        } else {
            let nodes = nodes_1d(level, placement)?;
            let m = nodes.len();
            if level == 2 {
                // New nodes are the endpoints; the hats fall to zero at the
                // center and extend (unused) past the domain boundary.
                vec![
                    NewNode {
                        x: nodes[0],
                        left: 2.0 * nodes[0] - nodes[1],
                        right: nodes[1],
                    },
                    NewNode {
                        x: nodes[m - 1],
                        left: nodes[m - 2],
                        right: 2.0 * nodes[m - 1] - nodes[m - 2],
                    },
                ]
            } else {
                // Odd indices are new; even indices already exist one level
                // down, by nesting.
                (1..m)
                    .step_by(2)
                    .map(|j| NewNode {
                        x: nodes[j],
                        left: nodes[j - 1],
                        right: nodes[j + 1],
                    })
                    .collect()
            }
        };
        levels.push(Level1d { new_nodes });
    }
    Ok(levels)
}

/// Locate the single hat of `level` that can be nonzero at `x`.
///
/// Returns `(new-node index, weight)`; the weight is zero exactly at support
/// edges and outside the level's new-node supports.
#[inline]
fn locate(level: &Level1d, level_index: usize, x: f64) -> (usize, f64) {
    if level_index == 1 {
        return (0, 1.0);
    }
    let nn = &level.new_nodes;
    let pos = nn.partition_point(|n| n.x <= x);
    if pos > 0 {
        let w = nn[pos - 1].hat(x);
        if w > 0.0 {
            return (pos - 1, w);
        }
    }
    if pos < nn.len() {
        let w = nn[pos].hat(x);
        if w > 0.0 {
            return (pos, w);
        }
    }
    (0, 0.0)
}

/// One Smolyak difference block: a level multi-index and the surpluses of its
/// tensor product of new nodes.
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Debug, Clone, PartialEq)]
struct Block {
    levels: Vec<u8>,
    /// Number of new nodes per dimension (cached tensor shape).
    shape: Vec<usize>,
    /// `node_count(block) * output_width` surpluses, node-major.
    surpluses: Vec<f64>,
}

/// Enumerate level multi-indices with components `>= 1` and `|i| <= q`,
/// ordered by total level, then lexicographically.
fn level_multi_indices(dim: usize, q: usize) -> Vec<Vec<u8>> {
    fn rec(dim_left: usize, total_left: usize, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if dim_left == 0 {
            if total_left == 0 {
                out.push(prefix.clone());
            }
            return;
        }
        // each remaining component needs at least one level
        let max_here = total_left - (dim_left - 1);
        for l in 1..=max_here {
            prefix.push(l as u8);
            rec(dim_left - 1, total_left - l, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for total in dim..=q {
        rec(dim, total, &mut Vec::new(), &mut out);
    }
    out
}

/// Node layout of a sparse grid, independent of any training values.
///
/// Exposes the canonical node ordering so callers can evaluate the target at
/// all nodes (possibly in parallel) and assemble the interpolant afterwards
/// with [`SparseGridInterpolant::from_values`].
#[derive(Debug, Clone)]
pub struct SparseGridDesign {
    dim: usize,
    q: usize,
    placement: Placement,
    levels_1d: Vec<Level1d>,
    block_levels: Vec<Vec<u8>>,
    n_nodes: usize,
}

impl SparseGridDesign {
    pub fn new(dim: usize, q: usize, placement: Placement) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("dimension must be >= 1".into()));
        }
        if q < dim {
            return Err(Error::InvalidConfig(alloc::format!(
                "level parameter q = {q} must be >= dimension r = {dim}"
            )));
        }
        let max_level = q - dim + 1;
        let levels_1d = build_levels(max_level, placement)?;
        let block_levels = level_multi_indices(dim, q);
        let n_nodes = block_levels
            .iter()
            .map(|levels| {
                levels
                    .iter()
                    .map(|&l| levels_1d[l as usize - 1].new_nodes.len())
                    .product::<usize>()
            })
            .sum();
        Ok(Self {
            dim,
            q,
            placement,
            levels_1d,
            block_levels,
            n_nodes,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self) -> usize {
        self.q
    }

    pub fn placement(&self) -> Placement {
        self.placement
    }

    /// Number of distinct grid nodes `N(q, r)`.
    pub fn node_count(&self) -> usize {
        self.n_nodes
    }

    /// All node coordinates in canonical order (blocks by total level then
    /// lexicographic, row-major tuples within a block).
    pub fn nodes(&self) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(self.n_nodes);
        for levels in &self.block_levels {
            let shape: Vec<usize> = levels
                .iter()
                .map(|&l| self.levels_1d[l as usize - 1].new_nodes.len())
                .collect();
            let count: usize = shape.iter().product();
            let mut idx = vec![0usize; self.dim];
            for _ in 0..count {
                let coord: Vec<f64> = (0..self.dim)
                    .map(|k| self.levels_1d[levels[k] as usize - 1].new_nodes[idx[k]].x)
                    .collect();
                out.push(coord);
                // row-major increment, last dimension fastest
                for k in (0..self.dim).rev() {
                    idx[k] += 1;
                    if idx[k] < shape[k] {
                        break;
                    }
                    idx[k] = 0;
                }
            }
        }
        out
    }
}

/// Hierarchical sparse-grid interpolant with vector-valued outputs.
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Debug, Clone, PartialEq)]
pub struct SparseGridInterpolant {
    dim: usize,
    q: usize,
    placement: Placement,
    output_width: usize,
    n_nodes: usize,
    levels_1d: Vec<Level1d>,
    blocks: Vec<Block>,
}

impl SparseGridInterpolant {
    /// Assemble an interpolant from values evaluated at the design's nodes in
    /// canonical order (`values.len() == node_count * output_width`,
    /// node-major).
    pub fn from_values(
        design: &SparseGridDesign,
        output_width: usize,
        values: &[f64],
    ) -> Result<Self> {
        if output_width == 0 {
            return Err(Error::InvalidConfig("output width must be >= 1".into()));
        }
        let expected = design.n_nodes * output_width;
        if values.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                got: values.len(),
            });
        }
        let bad: Vec<usize> = (0..design.n_nodes)
            .filter(|&i| {
                values[i * output_width..(i + 1) * output_width]
                    .iter()
                    .any(|v| !v.is_finite())
            })
            .collect();
        if !bad.is_empty() {
            return Err(Error::NonFiniteTraining { nodes: bad });
        }

        let mut interp = Self {
            dim: design.dim,
            q: design.q,
            placement: design.placement,
            output_width,
            n_nodes: design.n_nodes,
            levels_1d: design.levels_1d.clone(),
            blocks: design
                .block_levels
                .iter()
                .map(|levels| {
                    let shape: Vec<usize> = levels
                        .iter()
                        .map(|&l| design.levels_1d[l as usize - 1].new_nodes.len())
                        .collect();
                    let count: usize = shape.iter().product();
                    Block {
                        levels: levels.clone(),
                        shape,
                        surpluses: vec![0.0; count * output_width],
                    }
                })
                .collect(),
        };

        // Surpluses in canonical order: blocks are sorted by total level, so
        // by the time a node is processed every basis function that is
        // nonzero there already carries its final surplus, and the running
        // interpolant equals the partial Smolyak sum of all coarser blocks.
        let mut partial = vec![0.0; output_width];
        let mut coord = vec![0.0; design.dim];
        let mut flat = 0usize;
        for b in 0..interp.blocks.len() {
            let shape = interp.blocks[b].shape.clone();
            let count: usize = shape.iter().product();
            let mut idx = vec![0usize; design.dim];
            for node_in_block in 0..count {
                for k in 0..design.dim {
                    let l = interp.blocks[b].levels[k] as usize;
                    coord[k] = interp.levels_1d[l - 1].new_nodes[idx[k]].x;
                }
                interp.eval_into_unchecked(&coord, &mut partial);
                let base = node_in_block * output_width;
                let vals = &values[flat * output_width..(flat + 1) * output_width];
                for c in 0..output_width {
                    let mut s = vals[c] - partial[c];
                    // The telescoped float sum partial + (v - partial) can
                    // land one ulp off v; nudge the stored surplus until the
                    // accumulated evaluation reproduces the training value.
                    let mut guard = 0;
                    while partial[c] + s != vals[c] && guard < 4 {
                        let dir = if partial[c] + s < vals[c] {
                            f64::INFINITY
                        } else {
                            f64::NEG_INFINITY
                        };
                        s = libm::nextafter(s, dir);
                        guard += 1;
                    }
                    interp.blocks[b].surpluses[base + c] = s;
                }
                flat += 1;
                for k in (0..design.dim).rev() {
                    idx[k] += 1;
                    if idx[k] < shape[k] {
                        break;
                    }
                    idx[k] = 0;
                }
            }
        }
        Ok(interp)
    }

    /// Build by evaluating `f` exactly once per distinct grid node.
    pub fn build<F>(
        dim: usize,
        q: usize,
        placement: Placement,
        output_width: usize,
        mut f: F,
    ) -> Result<Self>
    where
        F: FnMut(&[f64]) -> Vec<f64>,
    {
        let design = SparseGridDesign::new(dim, q, placement)?;
        let mut values = Vec::with_capacity(design.node_count() * output_width);
        for node in design.nodes() {
            let v = f(&node);
            if v.len() != output_width {
                return Err(Error::LengthMismatch {
                    expected: output_width,
                    got: v.len(),
                });
            }
            values.extend_from_slice(&v);
        }
        Self::from_values(&design, output_width, &values)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self) -> usize {
        self.q
    }

    pub fn placement(&self) -> Placement {
        self.placement
    }

    pub fn output_width(&self) -> usize {
        self.output_width
    }

    /// Number of distinct training nodes `N(q, r)`.
    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    /// Evaluate all output channels at `x` in the closed unit cube.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.output_width];
        self.eval_into(x, &mut out)?;
        Ok(out)
    }

    /// Evaluate into a caller-provided buffer of length `output_width`.
    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::LengthMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        if out.len() != self.output_width {
            return Err(Error::LengthMismatch {
                expected: self.output_width,
                got: out.len(),
            });
        }
        for &v in x {
            if !(-1.0..=1.0).contains(&v) {
                return Err(Error::OutOfDomain {
                    what: "coordinate",
                    value: v,
                    lo: -1.0,
                    hi: 1.0,
                });
            }
        }
        self.eval_into_unchecked(x, out);
        Ok(())
    }

    fn eval_into_unchecked(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        let w = self.output_width;
        // At most one hat per (dimension, level) is nonzero, so each block
        // contributes a single weighted surplus row.
        let mut indices = [0usize; 16];
        let mut stack_idx = vec![0usize; self.dim.saturating_sub(16)];
        let idx: &mut [usize] = if self.dim <= 16 {
            &mut indices[..self.dim]
        } else {
            &mut stack_idx
        };
        'blocks: for block in &self.blocks {
            let mut weight = 1.0;
            for k in 0..self.dim {
                let l = block.levels[k] as usize;
                let (j, wk) = locate(&self.levels_1d[l - 1], l, x[k]);
                if wk == 0.0 {
                    continue 'blocks;
                }
                weight *= wk;
                idx[k] = j;
            }
            let mut flat = 0usize;
            for k in 0..self.dim {
                flat = flat * block.shape[k] + idx[k];
            }
            let row = &block.surpluses[flat * w..(flat + 1) * w];
            if weight == 1.0 {
                for c in 0..w {
                    out[c] += row[c];
                }
            } else {
                for c in 0..w {
                    out[c] += weight * row[c];
                }
            }
        }
    }
}

/// Binomial coefficient, used by the node-count bound checks.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1u64;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}
