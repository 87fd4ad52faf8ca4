//! Serial reference implementation of dilated k-NN graph construction: the
//! ground truth every pipeline configuration must match exactly.

use crate::dcm;
use crate::error::Result;
use crate::types::{
    validate_problem, DistEntry, FeatureMatrix, GraphConfig, NeighborIndexMatrix, PosBias,
};

/// Serial construction: full distance row per node (expansion identity,
/// ascending feature accumulation, same arithmetic as the blocked kernel),
/// full sort, top k*d slice, every d-th entry.
pub fn serial_digc(
    x: &FeatureMatrix,
    y: &FeatureMatrix,
    bias: &PosBias,
    cfg: GraphConfig,
) -> Result<NeighborIndexMatrix> {
    let prob = validate_problem(x, y, bias, cfg)?;
    let mut out = Vec::with_capacity(prob.n * prob.k);
    let mut row = Vec::with_capacity(prob.m);
    for i in 0..prob.n {
        row.clear();
        let xi = x.row(i);
        for j in 0..prob.m {
            let dist = dcm::pair_distance(xi, y.row(j), bias.at(i, j));
            row.push(DistEntry::new(dist, j as u32));
        }
        row.sort();
        for p in 0..prob.k {
            out.push(row[p * prob.d].index);
        }
    }
    NeighborIndexMatrix::new(prob.n, prob.k, out)
}

/// Cross-check oracle computing distances with the direct difference formula
/// `sum_d (x_d - y_d)^2` instead of the expansion identity.
///
/// Also returns, per row, the minimum adjacent distance gap among the first
/// min(k*d + 1, M) sorted candidates, so callers can discount rows whose
/// selection sits on a floating-point near-tie. Rows with a single candidate
/// report an infinite gap.
pub fn serial_digc_direct(
    x: &FeatureMatrix,
    y: &FeatureMatrix,
    bias: &PosBias,
    cfg: GraphConfig,
) -> Result<(NeighborIndexMatrix, Vec<f32>)> {
    let prob = validate_problem(x, y, bias, cfg)?;
    let mut out = Vec::with_capacity(prob.n * prob.k);
    let mut gaps = Vec::with_capacity(prob.n);
    let mut row = Vec::with_capacity(prob.m);
    for i in 0..prob.n {
        row.clear();
        let xi = x.row(i);
        for j in 0..prob.m {
            let yj = y.row(j);
            let mut acc = 0.0f32;
            for d in 0..prob.d_feat {
                let diff = xi[d] - yj[d];
                acc += diff * diff;
            }
            row.push(DistEntry::new(acc + bias.at(i, j), j as u32));
        }
        row.sort();
        for p in 0..prob.k {
            out.push(row[p * prob.d].index);
        }
        let boundary = (prob.k * prob.d).min(prob.m - 1);
        let gap = (0..boundary)
            .map(|j| row[j + 1].dist - row[j].dist)
            .fold(f32::INFINITY, f32::min);
        gaps.push(gap);
    }
    Ok((NeighborIndexMatrix::new(prob.n, prob.k, out)?, gaps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fm(rows: usize, cols: usize, data: Vec<f32>) -> FeatureMatrix {
        FeatureMatrix::new(rows, cols, data).unwrap()
    }

    #[test]
    fn self_nearest_two_nodes() {
        let x = fm(2, 1, vec![0.0, 1.0]);
        let bias = PosBias::zero(2, 2);
        let i = serial_digc(&x, &x, &bias, GraphConfig::new(1, 1).unwrap()).unwrap();
        assert_eq!(i.data(), &[0, 1]);
    }

    #[test]
    fn three_point_line_k2() {
        let x = fm(3, 1, vec![0.0, 1.0, 10.0]);
        let bias = PosBias::zero(3, 3);
        let i = serial_digc(&x, &x, &bias, GraphConfig::new(2, 1).unwrap()).unwrap();
        // distances from row 0: [0, 1, 100]; row 1: [1, 0, 81]; row 2: [100, 81, 0]
        assert_eq!(i.row(0), &[0, 1]);
        assert_eq!(i.row(1), &[1, 0]);
        assert_eq!(i.row(2), &[2, 1]);
    }

    #[test]
    fn dilation_slices_alternate_positions() {
        let x = fm(3, 1, vec![0.0, 1.0, 10.0]);
        let bias = PosBias::zero(3, 3);
        // k=1, d=2: positions {0}. k*d=2 <= M=3.
        let i = serial_digc(&x, &x, &bias, GraphConfig::new(1, 2).unwrap()).unwrap();
        assert_eq!(i.data(), &[0, 1, 2]);
    }

    #[test]
    fn indices_distinct_and_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 9;
        let m = 13;
        let df = 5;
        let x = fm(n, df, (0..n * df).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let y = fm(m, df, (0..m * df).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let bias = PosBias::zero(n, m);
        let i = serial_digc(&x, &y, &bias, GraphConfig::new(4, 3).unwrap()).unwrap();
        for r in 0..n {
            let row = i.row(r);
            let mut seen = row.to_vec();
            seen.sort_unstable();
            seen.dedup();
            assert_eq!(seen.len(), row.len());
            assert!(row.iter().all(|&j| (j as usize) < m));
        }
    }

    #[test]
    fn bias_row_shift_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 6;
        let m = 10;
        let df = 4;
        let xd: Vec<f32> = (0..n * df).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let yd: Vec<f32> = (0..m * df).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = fm(n, df, xd);
        let y = fm(m, df, yd);
        let bd: Vec<f32> = (0..n * m).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let bias = PosBias::dense(n, m, bd.clone()).unwrap();
        // add 16.0 to one whole bias row (power of two keeps sums exact here)
        let mut shifted = bd;
        for v in &mut shifted[2 * m..3 * m] {
            *v += 16.0;
        }
        let bias2 = PosBias::dense(n, m, shifted).unwrap();
        let cfg = GraphConfig::new(3, 2).unwrap();
        let a = serial_digc(&x, &y, &bias, cfg).unwrap();
        let b = serial_digc(&x, &y, &bias2, cfg).unwrap();
        assert_eq!(a.row(2), b.row(2));
    }

    #[test]
    fn exact_scaling_invariance_on_integer_features() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 8;
        let df = 3;
        let data: Vec<f32> = (0..n * df).map(|_| rng.gen_range(-8..8) as f32).collect();
        let x = fm(n, df, data.clone());
        let x2 = fm(n, df, data.iter().map(|v| v * 2.0).collect());
        let bias = PosBias::zero(n, n);
        let cfg = GraphConfig::new(2, 2).unwrap();
        let a = serial_digc(&x, &x, &bias, cfg).unwrap();
        let b = serial_digc(&x2, &x2, &bias, cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn direct_oracle_agrees_on_separated_clusters() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 12;
        let df = 4;
        // two well-separated clusters
        let data: Vec<f32> = (0..n)
            .flat_map(|i| {
                let center = if i % 2 == 0 { 0.0 } else { 10.0 };
                (0..df)
                    .map(|_| center + rng.gen_range(-0.5..0.5))
                    .collect::<Vec<_>>()
            })
            .collect();
        let x = fm(n, df, data);
        let bias = PosBias::zero(n, n);
        let cfg = GraphConfig::new(3, 2).unwrap();
        let a = serial_digc(&x, &x, &bias, cfg).unwrap();
        let (b, gaps) = serial_digc_direct(&x, &x, &bias, cfg).unwrap();
        for (r, &gap) in gaps.iter().enumerate() {
            if gap > 1e-2 {
                assert_eq!(a.row(r), b.row(r));
            }
        }
    }

    #[test]
    fn duplicate_conode_rows_tie_by_index_in_both_oracles() {
        let x = fm(2, 2, vec![0.0, 0.0, 1.0, 1.0]);
        let y = fm(4, 2, vec![0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5]);
        let bias = PosBias::zero(2, 4);
        let cfg = GraphConfig::new(2, 2).unwrap();
        let a = serial_digc(&x, &y, &bias, cfg).unwrap();
        let (b, _) = serial_digc_direct(&x, &y, &bias, cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.row(0), &[0, 2]);
    }
}
