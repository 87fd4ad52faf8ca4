//! Domain types shared by every pipeline stage: feature matrices, the
//! positional bias, graph and partition parameters, and the totally ordered
//! (distance, index) entry that all sorting and merging is defined over.

use std::cmp::Ordering;

use crate::error::{DigcError, Result};

/// Dense row-major matrix of f32 feature vectors (nodes X or co-nodes Y).
///
/// Immutable after construction; all values are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f32>,
}

impl FeatureMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f32>) -> Result<Self> {
        if rows < 1 || cols < 1 {
            return Err(DigcError::DimensionMismatch {
                context: "matrix shape must be at least 1x1",
                left: rows.to_string(),
                right: cols.to_string(),
            });
        }
        if data.len() != rows * cols {
            return Err(DigcError::DimensionMismatch {
                context: "data length vs rows*cols",
                left: data.len().to_string(),
                right: (rows * cols).to_string(),
            });
        }
        if let Some(at) = data.iter().position(|v| !v.is_finite()) {
            return Err(DigcError::NonFinite {
                at,
                value: data[at],
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    /// Row `i` as a feature-vector slice.
    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

/// Relative positional bias added to the distance matrix before sorting.
/// `Zero` stands for the canonical all-zero bias without materializing it.
#[derive(Debug, Clone, PartialEq)]
pub struct PosBias {
    rows: usize,
    cols: usize,
    data: Option<Vec<f32>>,
}

impl PosBias {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: None,
        }
    }

    pub fn dense(rows: usize, cols: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(DigcError::DimensionMismatch {
                context: "bias data length vs rows*cols",
                left: data.len().to_string(),
                right: (rows * cols).to_string(),
            });
        }
        if let Some(at) = data.iter().position(|v| !v.is_finite()) {
            return Err(DigcError::NonFinite {
                at,
                value: data[at],
            });
        }
        Ok(Self {
            rows,
            cols,
            data: Some(data),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.is_none()
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f32 {
        match &self.data {
            Some(d) => d[i * self.cols + j],
            None => 0.0,
        }
    }
}

/// Graph connectivity parameters: k neighbors per node, dilation factor d.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphConfig {
    pub k: usize,
    pub d: usize,
}

impl GraphConfig {
    pub fn new(k: usize, d: usize) -> Result<Self> {
        if k < 1 || d < 1 {
            return Err(DigcError::InvalidPlan(format!(
                "k and d must be >= 1, got k={k} d={d}"
            )));
        }
        Ok(Self { k, d })
    }
}

/// Blocking and parallelism parameters for the partitioned pipeline.
///
/// `q` is always `ceil(m_conodes / m)`; the last partition may be ragged.
/// The parallelism parameters shape the block schedule and the cycle model
/// but never affect arithmetic results.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartitionPlan {
    pub m: usize,
    pub q: usize,
    pub p_row: usize,
    pub p_col: usize,
    pub p_vec: usize,
    pub p_sort: usize,
}

impl PartitionPlan {
    pub fn new(
        m: usize,
        m_conodes: usize,
        p_row: usize,
        p_col: usize,
        p_vec: usize,
        p_sort: usize,
    ) -> Result<Self> {
        if m < 1 {
            return Err(DigcError::InvalidPlan("partition width m must be >= 1".into()));
        }
        if m_conodes < 1 {
            return Err(DigcError::InvalidPlan("co-node count must be >= 1".into()));
        }
        if p_row < 1 || p_col < 1 || p_vec < 1 || p_sort < 1 {
            return Err(DigcError::InvalidPlan(
                "parallelism parameters must all be >= 1".into(),
            ));
        }
        let q = m_conodes.div_ceil(m);
        Ok(Self {
            m,
            q,
            p_row,
            p_col,
            p_vec,
            p_sort,
        })
    }
}

/// A (distance, global co-node index) pair.
///
/// The total order is lexicographic: distance first, index-ascending on ties.
/// Distances are finite by invariant, so `Ord` is well defined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistEntry {
    pub dist: f32,
    pub index: u32,
}

impl DistEntry {
    pub fn new(dist: f32, index: u32) -> Self {
        debug_assert!(dist.is_finite());
        Self { dist, index }
    }
}

impl Eq for DistEntry {}

impl PartialOrd for DistEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DistEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist
            .partial_cmp(&other.dist)
            .expect("DistEntry distances are finite")
            .then(self.index.cmp(&other.index))
    }
}

/// Strict order on entries: distance-ascending, index breaks ties ascending.
#[inline]
pub fn entry_less(a: DistEntry, b: DistEntry) -> bool {
    a.cmp(&b) == Ordering::Less
}

/// The N x k output of neighbor selection, row-major global co-node indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborIndexMatrix {
    rows: usize,
    k: usize,
    data: Vec<u32>,
}

impl NeighborIndexMatrix {
    pub fn new(rows: usize, k: usize, data: Vec<u32>) -> Result<Self> {
        if data.len() != rows * k {
            return Err(DigcError::DimensionMismatch {
                context: "neighbor data length vs rows*k",
                left: data.len().to_string(),
                right: (rows * k).to_string(),
            });
        }
        Ok(Self { rows, k, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn data(&self) -> &[u32] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.k..(i + 1) * self.k]
    }
}

/// Dimensions of a validated problem instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Problem {
    pub n: usize,
    pub m: usize,
    pub d_feat: usize,
    pub k: usize,
    pub d: usize,
}

/// Validation gate for every downstream stage: checks feature-dimension
/// agreement, bias shape, and k*d <= M.
pub fn validate_problem(
    x: &FeatureMatrix,
    y: &FeatureMatrix,
    bias: &PosBias,
    cfg: GraphConfig,
) -> Result<Problem> {
    if x.cols() != y.cols() {
        return Err(DigcError::DimensionMismatch {
            context: "feature dimension of X vs Y",
            left: x.cols().to_string(),
            right: y.cols().to_string(),
        });
    }
    if bias.rows() != x.rows() || bias.cols() != y.rows() {
        return Err(DigcError::DimensionMismatch {
            context: "bias shape vs N x M",
            left: format!("{}x{}", bias.rows(), bias.cols()),
            right: format!("{}x{}", x.rows(), y.rows()),
        });
    }
    if cfg.k * cfg.d > y.rows() {
        return Err(DigcError::KdExceedsM {
            k: cfg.k,
            d: cfg.d,
            m: y.rows(),
        });
    }
    Ok(Problem {
        n: x.rows(),
        m: y.rows(),
        d_feat: x.cols(),
        k: cfg.k,
        d: cfg.d,
    })
}
