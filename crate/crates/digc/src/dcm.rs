//! Distance computation: blocked squared-Euclidean distances with positional
//! bias via the expansion identity `|x|^2 - 2<x,y> + |y|^2`.
//!
//! Accumulation over the feature dimension is always ascending, so blocked
//! and whole-matrix computations produce bit-identical f32 distances.

use crate::error::{DigcError, Result};
use crate::types::{FeatureMatrix, PartitionPlan, PosBias};

/// One tile of the N x M distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceBlock {
    pub row_base: usize,
    pub col_base: usize,
    pub n_rows: usize,
    pub n_cols: usize,
    /// Row-major distances, length `n_rows * n_cols`.
    pub data: Vec<f32>,
}

impl DistanceBlock {
    pub fn at(&self, i: usize, j: usize) -> f32 {
        self.data[i * self.n_cols + j]
    }
}

/// Squared Euclidean distance between two feature vectors plus bias, using
/// the expansion identity with three f32 accumulators walked in ascending
/// feature order.
#[inline]
pub fn pair_distance(x: &[f32], y: &[f32], bias: f32) -> f32 {
    debug_assert_eq!(x.len(), y.len());
    let mut x_sq = 0.0f32;
    let mut y_sq = 0.0f32;
    let mut xy_sum = 0.0f32;
    for d in 0..x.len() {
        let xv = x[d];
        let yv = y[d];
        x_sq += xv * xv;
        y_sq += yv * yv;
        xy_sum += xv * yv;
    }
    x_sq + y_sq - 2.0 * xy_sum + bias
}

/// Computes the distance tile with origin (`row_base`, `col_base`) and shape
/// `n_rows` x `n_cols`.
pub fn compute_block(
    x: &FeatureMatrix,
    y: &FeatureMatrix,
    bias: &PosBias,
    row_base: usize,
    n_rows: usize,
    col_base: usize,
    n_cols: usize,
) -> Result<DistanceBlock> {
    if x.cols() != y.cols() {
        return Err(DigcError::DimensionMismatch {
            context: "feature dimension of X vs Y",
            left: x.cols().to_string(),
            right: y.cols().to_string(),
        });
    }
    if row_base + n_rows > x.rows() || col_base + n_cols > y.rows() {
        return Err(DigcError::DimensionMismatch {
            context: "block extent vs matrix shape",
            left: format!("{}+{} x {}+{}", row_base, n_rows, col_base, n_cols),
            right: format!("{} x {}", x.rows(), y.rows()),
        });
    }
    let mut data = Vec::with_capacity(n_rows * n_cols);
    for i in 0..n_rows {
        let xi = x.row(row_base + i);
        for j in 0..n_cols {
            let yj = y.row(col_base + j);
            let b = bias.at(row_base + i, col_base + j);
            data.push(pair_distance(xi, yj, b));
        }
    }
    Ok(DistanceBlock {
        row_base,
        col_base,
        n_rows,
        n_cols,
        data,
    })
}

/// One entry of the block schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockSpec {
    pub row_base: usize,
    pub col_base: usize,
    pub n_rows: usize,
    pub n_cols: usize,
}

/// Tiles [0,N) x [0,M) exactly once: blocks of height `min(p_row, rest)` and
/// width `min(m, rest)`, ordered column-partition-major so each co-node
/// partition emits a contiguous stream of blocks down the node axis.
pub fn block_schedule(n: usize, m_conodes: usize, plan: &PartitionPlan) -> Vec<BlockSpec> {
    let mut blocks = Vec::new();
    let mut col_base = 0;
    while col_base < m_conodes {
        let n_cols = plan.m.min(m_conodes - col_base);
        let mut row_base = 0;
        while row_base < n {
            let n_rows = plan.p_row.min(n - row_base);
            blocks.push(BlockSpec {
                row_base,
                col_base,
                n_rows,
                n_cols,
            });
            row_base += n_rows;
        }
        col_base += n_cols;
    }
    blocks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::PartitionPlan;

    fn fm(rows: usize, cols: usize, data: Vec<f32>) -> FeatureMatrix {
        FeatureMatrix::new(rows, cols, data).unwrap()
    }

    #[test]
    fn zero_vectors_zero_distance() {
        let x = fm(1, 2, vec![0.0, 0.0]);
        let b = compute_block(&x, &x, &PosBias::zero(1, 1), 0, 1, 0, 1).unwrap();
        assert_eq!(b.at(0, 0), 0.0);
    }

    #[test]
    fn hand_checked_distance() {
        let x = fm(1, 2, vec![1.0, 2.0]);
        let y = fm(1, 2, vec![3.0, 4.0]);
        let b = compute_block(&x, &y, &PosBias::zero(1, 1), 0, 1, 0, 1).unwrap();
        assert_eq!(b.at(0, 0), 8.0);
    }

    #[test]
    fn bias_applied_inside_block() {
        let x = fm(1, 2, vec![1.0, 0.0]);
        let y = fm(1, 2, vec![0.0, 1.0]);
        let bias = PosBias::dense(1, 1, vec![-2.0]).unwrap();
        let b = compute_block(&x, &y, &bias, 0, 1, 0, 1).unwrap();
        assert_eq!(b.at(0, 0), 0.0);
    }

    #[test]
    fn even_schedule() {
        let plan = PartitionPlan::new(2, 4, 2, 2, 1, 1).unwrap();
        let blocks = block_schedule(4, 4, &plan);
        let origins: Vec<_> = blocks.iter().map(|b| (b.row_base, b.col_base)).collect();
        assert_eq!(origins, vec![(0, 0), (2, 0), (0, 2), (2, 2)]);
        assert!(blocks.iter().all(|b| b.n_rows == 2 && b.n_cols == 2));
    }

    #[test]
    fn ragged_schedule_covers_all_cells() {
        let plan = PartitionPlan::new(2, 5, 2, 2, 1, 1).unwrap();
        let blocks = block_schedule(3, 5, &plan);
        assert!(blocks.iter().any(|b| b.n_rows == 1));
        assert!(blocks.iter().any(|b| b.n_cols == 1));
        let mut covered = [false; 3 * 5];
        for b in &blocks {
            for i in b.row_base..b.row_base + b.n_rows {
                for j in b.col_base..b.col_base + b.n_cols {
                    assert!(!covered[i * 5 + j], "overlap at ({i},{j})");
                    covered[i * 5 + j] = true;
                }
            }
        }
        assert!(covered.iter().all(|&c| c));
    }

    #[test]
    fn symmetry_with_shared_matrix() {
        let x = fm(3, 4, (0..12).map(|v| v as f32 * 0.37 - 1.5).collect());
        let b = compute_block(&x, &x, &PosBias::zero(3, 3), 0, 3, 0, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(b.at(i, j).to_bits(), b.at(j, i).to_bits());
            }
        }
    }
}
