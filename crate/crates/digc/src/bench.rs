//! Streaming-vs-naive timing harness behind the `bench` subcommand.

use std::io::Write;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::oracle;
use crate::pipeline;
use crate::synthetic::random_matrix;
use crate::types::{GraphConfig, PosBias};

pub const CSV_HEADER: &str = "n,m_nodes,d_feat,k,d,impl,workers,elapsed_ms";

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub n: usize,
    pub m_nodes: usize,
    pub d_feat: usize,
    pub k: usize,
    pub d: usize,
    pub impl_name: &'static str,
    pub workers: usize,
    pub elapsed_ms: f64,
}

impl BenchRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{:.3}",
            self.n, self.m_nodes, self.d_feat, self.k, self.d, self.impl_name, self.workers,
            self.elapsed_ms
        )
    }
}

fn median(samples: &mut [f64]) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len();
    if n % 2 == 1 {
        samples[n / 2]
    } else {
        (samples[n / 2 - 1] + samples[n / 2]) / 2.0
    }
}

/// Runs streaming pipeline and naive full-sort oracle on X = Y instances of
/// each size. Each measurement is the median of `repeats` runs after one
/// excluded warm-up.
pub fn run_bench(
    sizes: &[usize],
    d_feat: usize,
    k: usize,
    d: usize,
    repeats: usize,
    workers: usize,
    seed: u64,
) -> Result<Vec<BenchRow>> {
    let repeats = repeats.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = GraphConfig::new(k, d)?;
    let mut rows = Vec::new();
    for &n in sizes {
        let x = random_matrix(&mut rng, n, d_feat);
        let bias = PosBias::zero(n, n);
        let plan = pipeline::plan_default(n, cfg)?;

        let mut streaming = Vec::with_capacity(repeats);
        for rep in 0..=repeats {
            let t0 = Instant::now();
            let out = pipeline::run_pipeline(&x, &x, &bias, cfg, &plan, workers)?;
            let ms = t0.elapsed().as_secs_f64() * 1e3;
            std::hint::black_box(out);
            if rep > 0 {
                streaming.push(ms);
            }
        }
        rows.push(BenchRow {
            n,
            m_nodes: n,
            d_feat,
            k,
            d,
            impl_name: "streaming",
            workers,
            elapsed_ms: median(&mut streaming),
        });

        let mut naive = Vec::with_capacity(repeats);
        for rep in 0..=repeats {
            let t0 = Instant::now();
            let out = oracle::serial_digc(&x, &x, &bias, cfg)?;
            let ms = t0.elapsed().as_secs_f64() * 1e3;
            std::hint::black_box(out);
            if rep > 0 {
                naive.push(ms);
            }
        }
        rows.push(BenchRow {
            n,
            m_nodes: n,
            d_feat,
            k,
            d,
            impl_name: "naive",
            workers: 1,
            elapsed_ms: median(&mut naive),
        });
    }
    Ok(rows)
}

pub fn write_csv(writer: &mut impl Write, rows: &[BenchRow]) -> Result<()> {
    writeln!(writer, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(writer, "{}", row.to_csv())?;
    }
    Ok(())
}
