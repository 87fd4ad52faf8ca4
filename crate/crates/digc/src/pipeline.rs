//! Streaming orchestration of the four stages over the block schedule.
//!
//! A node-row group of height `p_row` flows through distance computation,
//! local sorting, global merging and neighbor selection before the next
//! group starts, so intermediate state stays bounded by the group footprint
//! instead of the full N x M distance matrix. Groups are independent and
//! pure, which makes the output identical for any worker count.

use std::cmp::Ordering;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};
use std::sync::Mutex;

use crate::dcm;
use crate::error::{DigcError, Result};
use crate::gmm;
use crate::lsm::{self, SortedPartitionStream};
use crate::nsm;
use crate::types::{
    validate_problem, DistEntry, FeatureMatrix, GraphConfig, NeighborIndexMatrix, PartitionPlan,
    PosBias, Problem,
};

/// Paper-derived default plan: partition width 28 (clamped to M) and 8-way
/// parallelism parameters throughout.
pub fn plan_default(m_conodes: usize, _cfg: GraphConfig) -> Result<PartitionPlan> {
    let m = 28.min(m_conodes);
    PartitionPlan::new(m, m_conodes, 8, 8, 8, 8)
}

/// Instrumentation gathered while running the pipeline.
#[derive(Debug, Clone, Copy, Default)]
pub struct PipelineStats {
    /// Peak number of (distance, index) entries simultaneously resident in
    /// intermediate buffers, summed across workers.
    pub peak_intermediate_entries: usize,
}

#[derive(Default)]
struct EntryCounter {
    current: AtomicUsize,
    peak: AtomicUsize,
}

impl EntryCounter {
    fn add(&self, n: usize) {
        let now = self.current.fetch_add(n, AtomicOrdering::Relaxed) + n;
        self.peak.fetch_max(now, AtomicOrdering::Relaxed);
    }

    fn sub(&self, n: usize) {
        self.current.fetch_sub(n, AtomicOrdering::Relaxed);
    }
}

pub fn run_pipeline(
    x: &FeatureMatrix,
    y: &FeatureMatrix,
    bias: &PosBias,
    cfg: GraphConfig,
    plan: &PartitionPlan,
    workers: usize,
) -> Result<NeighborIndexMatrix> {
    run_pipeline_with_stats(x, y, bias, cfg, plan, workers, DistEntry::cmp).map(|(out, _)| out)
}

/// Test-only negative control: runs the pipeline with the local-sort
/// tie-break flipped to index-descending, so instances with equal distances
/// must diverge from the oracle.
pub fn run_pipeline_tie_faulted(
    x: &FeatureMatrix,
    y: &FeatureMatrix,
    bias: &PosBias,
    cfg: GraphConfig,
    plan: &PartitionPlan,
    workers: usize,
) -> Result<NeighborIndexMatrix> {
    let flipped = |a: &DistEntry, b: &DistEntry| {
        a.dist
            .partial_cmp(&b.dist)
            .expect("finite")
            .then(b.index.cmp(&a.index))
    };
    run_pipeline_with_stats(x, y, bias, cfg, plan, workers, flipped).map(|(out, _)| out)
}

/// As `run_pipeline`, additionally reporting buffer instrumentation.
pub fn run_pipeline_instrumented(
    x: &FeatureMatrix,
    y: &FeatureMatrix,
    bias: &PosBias,
    cfg: GraphConfig,
    plan: &PartitionPlan,
    workers: usize,
) -> Result<(NeighborIndexMatrix, PipelineStats)> {
    run_pipeline_with_stats(x, y, bias, cfg, plan, workers, DistEntry::cmp)
}

fn run_pipeline_with_stats(
    x: &FeatureMatrix,
    y: &FeatureMatrix,
    bias: &PosBias,
    cfg: GraphConfig,
    plan: &PartitionPlan,
    workers: usize,
    sort_cmp: impl Fn(&DistEntry, &DistEntry) -> Ordering + Copy + Send + Sync,
) -> Result<(NeighborIndexMatrix, PipelineStats)> {
    let prob = validate_problem(x, y, bias, cfg)?;
    if plan.q != prob.m.div_ceil(plan.m) {
        return Err(DigcError::InvalidPlan(format!(
            "plan Q={} inconsistent with M={} m={}",
            plan.q, prob.m, plan.m
        )));
    }
    let workers = workers.max(1);
    let counter = EntryCounter::default();

    let n_groups = prob.n.div_ceil(plan.p_row);
    // Results are committed per group index; group outputs are disjoint, so
    // assembly order is fixed regardless of which worker finishes first.
    let results: Mutex<Vec<Option<Vec<u32>>>> = Mutex::new(vec![None; n_groups]);
    let next_group = AtomicUsize::new(0);
    let failure: Mutex<Option<DigcError>> = Mutex::new(None);

    std::thread::scope(|scope| {
        for _ in 0..workers.min(n_groups.max(1)) {
            scope.spawn(|| loop {
                let g = next_group.fetch_add(1, AtomicOrdering::Relaxed);
                if g >= n_groups {
                    break;
                }
                let row_base = g * plan.p_row;
                let n_rows = plan.p_row.min(prob.n - row_base);
                match process_group(
                    x, y, bias, &prob, plan, row_base, n_rows, &counter, sort_cmp,
                ) {
                    Ok(rows) => {
                        results.lock().unwrap()[g] = Some(rows);
                    }
                    Err(e) => {
                        *failure.lock().unwrap() = Some(e);
                        break;
                    }
                }
            });
        }
    });

    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    let mut data = Vec::with_capacity(prob.n * prob.k);
    for group in results.into_inner().unwrap() {
        let group = group.ok_or_else(|| DigcError::WorkerFailure("missing group result".into()))?;
        data.extend(group);
    }
    let out = NeighborIndexMatrix::new(prob.n, prob.k, data)?;
    let stats = PipelineStats {
        peak_intermediate_entries: counter.peak.load(AtomicOrdering::Relaxed),
    };
    Ok((out, stats))
}

/// Runs one node group through all four stages and returns its k-neighbor
/// rows, flattened row-major.
#[allow(clippy::too_many_arguments)]
fn process_group(
    x: &FeatureMatrix,
    y: &FeatureMatrix,
    bias: &PosBias,
    prob: &Problem,
    plan: &PartitionPlan,
    row_base: usize,
    n_rows: usize,
    counter: &EntryCounter,
    sort_cmp: impl Fn(&DistEntry, &DistEntry) -> Ordering + Copy,
) -> Result<Vec<u32>> {
    let kd = prob.k * prob.d;
    let mut streams: Vec<Vec<SortedPartitionStream>> = (0..n_rows).map(|_| Vec::new()).collect();

    let mut col_base = 0;
    let mut partition = 0;
    while col_base < prob.m {
        let width = plan.m.min(prob.m - col_base);
        let block = dcm::compute_block(x, y, bias, row_base, n_rows, col_base, width)?;
        counter.add(n_rows * width);
        let t = kd.min(width);
        let mut row_entries = Vec::with_capacity(width);
        for (i, node_streams) in streams.iter_mut().enumerate() {
            row_entries.clear();
            for j in 0..width {
                row_entries.push(DistEntry::new(block.at(i, j), (col_base + j) as u32));
            }
            let entries = lsm::sort_partition_row_by(&row_entries, t, sort_cmp);
            counter.add(entries.len());
            node_streams.push(SortedPartitionStream {
                node: row_base + i,
                partition,
                entries,
            });
        }
        counter.sub(n_rows * width);
        col_base += width;
        partition += 1;
    }

    let limit = kd.min(prob.m);
    let mut out = Vec::with_capacity(n_rows * prob.k);
    for (i, node_streams) in streams.iter().enumerate() {
        let merged = gmm::merge_streams(node_streams, limit)?;
        counter.add(merged.entries.len());
        let sel = nsm::select_dilated(&merged, prob.k, prob.d)?;
        if sel.shortfall > 0 {
            // unreachable when validate_problem enforced k*d <= M
            return Err(DigcError::WorkerFailure(format!(
                "node {} produced only {} of {} neighbors",
                row_base + i,
                sel.indices.len(),
                prob.k
            )));
        }
        out.extend(sel.indices);
        counter.sub(merged.entries.len());
    }
    for node_streams in &streams {
        for s in node_streams {
            counter.sub(s.entries.len());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> FeatureMatrix {
        FeatureMatrix::new(
            rows,
            cols,
            (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn plan_default_values() {
        let cfg = GraphConfig::new(8, 2).unwrap();
        let p = plan_default(196, cfg).unwrap();
        assert_eq!((p.m, p.q), (28, 7));
        assert_eq!((p.p_row, p.p_col, p.p_vec, p.p_sort), (8, 8, 8, 8));
        let p = plan_default(10, cfg).unwrap();
        assert_eq!((p.m, p.q), (10, 1));
        let p = plan_default(30, cfg).unwrap();
        assert_eq!((p.m, p.q), (28, 2));
    }

    #[test]
    fn single_node_single_conode() {
        let x = FeatureMatrix::new(1, 1, vec![0.3]).unwrap();
        let bias = PosBias::zero(1, 1);
        let cfg = GraphConfig::new(1, 1).unwrap();
        let plan = plan_default(1, cfg).unwrap();
        let out = run_pipeline(&x, &x, &bias, cfg, &plan, 1).unwrap();
        assert_eq!(out.data(), &[0]);
    }

    #[test]
    fn self_nearest_under_tie_break() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_matrix(&mut rng, 7, 3);
        let bias = PosBias::zero(7, 7);
        let cfg = GraphConfig::new(1, 1).unwrap();
        let plan = PartitionPlan::new(3, 7, 2, 2, 1, 1).unwrap();
        let out = run_pipeline(&x, &x, &bias, cfg, &plan, 2).unwrap();
        for i in 0..7 {
            assert_eq!(out.row(i), &[i as u32]);
        }
    }

    #[test]
    fn matches_oracle_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..60 {
            let n = rng.gen_range(1..=24);
            let m = rng.gen_range(1..=24);
            let df = rng.gen_range(1..=8);
            let d = rng.gen_range(1..=3.min(m));
            let k = rng.gen_range(1..=m / d);
            let pm = rng.gen_range(1..=m);
            let x = random_matrix(&mut rng, n, df);
            let y = random_matrix(&mut rng, m, df);
            let bias = PosBias::zero(n, m);
            let cfg = GraphConfig::new(k, d).unwrap();
            let plan = PartitionPlan::new(pm, m, rng.gen_range(1..=4), 1, 1, 1).unwrap();
            let expect = oracle::serial_digc(&x, &y, &bias, cfg).unwrap();
            let got = run_pipeline(&x, &y, &bias, cfg, &plan, rng.gen_range(1..=4)).unwrap();
            assert_eq!(got, expect, "n={n} m={m} df={df} k={k} d={d} pm={pm}");
        }
    }

    #[test]
    fn dense_bias_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 11;
        let m = 17;
        let x = random_matrix(&mut rng, n, 6);
        let y = random_matrix(&mut rng, m, 6);
        let bias = PosBias::dense(n, m, (0..n * m).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .unwrap();
        let cfg = GraphConfig::new(3, 2).unwrap();
        let plan = PartitionPlan::new(5, m, 4, 1, 1, 1).unwrap();
        let expect = oracle::serial_digc(&x, &y, &bias, cfg).unwrap();
        let got = run_pipeline(&x, &y, &bias, cfg, &plan, 3).unwrap();
        assert_eq!(got, expect);
    }

    #[test]
    fn memory_stays_within_group_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let n = 40;
        let m = 50;
        let x = random_matrix(&mut rng, n, 8);
        let y = random_matrix(&mut rng, m, 8);
        let bias = PosBias::zero(n, m);
        let cfg = GraphConfig::new(4, 2).unwrap();
        let plan = PartitionPlan::new(7, m, 4, 1, 1, 1).unwrap();
        let (_, stats) =
            run_pipeline_instrumented(&x, &y, &bias, cfg, &plan, 1).unwrap();
        let bound = 2 * (plan.p_row * plan.m * plan.q + plan.p_row * plan.q * cfg.k * cfg.d);
        assert!(
            stats.peak_intermediate_entries < bound,
            "peak {} vs bound {}",
            stats.peak_intermediate_entries,
            bound
        );
        // and in particular never the full N*M matrix
        assert!(stats.peak_intermediate_entries < n * m);
    }

    #[test]
    fn tie_fault_diverges_on_duplicate_conodes() {
        let x = FeatureMatrix::new(1, 2, vec![0.0, 0.0]).unwrap();
        let y = FeatureMatrix::new(32, 2, vec![0.5; 64]).unwrap();
        let bias = PosBias::zero(1, 32);
        let cfg = GraphConfig::new(2, 1).unwrap();
        let plan = PartitionPlan::new(8, 32, 1, 1, 1, 1).unwrap();
        let good = run_pipeline(&x, &y, &bias, cfg, &plan, 1).unwrap();
        let bad = run_pipeline_tie_faulted(&x, &y, &bias, cfg, &plan, 1).unwrap();
        assert_eq!(good.data(), &[0, 1]);
        assert_ne!(good, bad);
    }
}
