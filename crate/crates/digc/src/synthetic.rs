//! Seeded random problem instances for verification and benchmarking.

use rand::Rng;

use crate::types::{FeatureMatrix, GraphConfig, PartitionPlan, PosBias};

#[derive(Debug, Clone)]
pub struct Instance {
    pub x: FeatureMatrix,
    pub y: FeatureMatrix,
    pub bias: PosBias,
    pub cfg: GraphConfig,
    pub plan: PartitionPlan,
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> FeatureMatrix {
    FeatureMatrix::new(
        rows,
        cols,
        (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect(),
    )
    .expect("generated matrix is valid")
}

/// Draws a random legal instance: dimensions up to the given caps, legal
/// (k, d, m), occasionally isotropic (Y = X), with duplicated co-node rows
/// or a dense bias mixed in for tie and bias coverage.
pub fn random_instance(rng: &mut impl Rng, max_n: usize, max_d_feat: usize) -> Instance {
    let n = rng.gen_range(1..=max_n);
    let d_feat = rng.gen_range(1..=max_d_feat);
    let isotropic = rng.gen_bool(0.3);
    let x = random_matrix(rng, n, d_feat);
    let mut y = if isotropic {
        x.clone()
    } else {
        let m = rng.gen_range(1..=max_n);
        random_matrix(rng, m, d_feat)
    };
    if rng.gen_bool(0.2) && y.rows() >= 2 {
        // duplicate a co-node row to exercise tie-breaking
        let src = rng.gen_range(0..y.rows());
        let dst = rng.gen_range(0..y.rows());
        let mut data = y.data().to_vec();
        let row: Vec<f32> = y.row(src).to_vec();
        data[dst * d_feat..(dst + 1) * d_feat].copy_from_slice(&row);
        y = FeatureMatrix::new(y.rows(), d_feat, data).expect("valid");
    }
    let m = y.rows();
    let bias = if rng.gen_bool(0.3) {
        PosBias::dense(n, m, (0..n * m).map(|_| rng.gen_range(-0.5..0.5)).collect())
            .expect("valid bias")
    } else {
        PosBias::zero(n, m)
    };
    let d = rng.gen_range(1..=4.min(m));
    let k = rng.gen_range(1..=m / d);
    let cfg = GraphConfig::new(k, d).expect("legal k, d");
    let plan = PartitionPlan::new(
        rng.gen_range(1..=m),
        m,
        rng.gen_range(1..=8),
        rng.gen_range(1..=8),
        rng.gen_range(1..=8),
        rng.gen_range(1..=8),
    )
    .expect("legal plan");
    Instance {
        x,
        y,
        bias,
        cfg,
        plan,
    }
}
