use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use digc::bench;
use digc::ingest;
use digc::oracle;
use digc::perfmodel;
use digc::pipeline;
use digc::synthetic;
use digc::types::{FeatureMatrix, GraphConfig, PartitionPlan, PosBias};
use digc::DigcError;

const EXIT_IO: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_MISMATCH: u8 = 3;

#[derive(Parser)]
#[command(
    name = "digc",
    about = "Dilated k-NN image graph construction: streaming pipeline, oracle verification, cycle model, benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a neighbor index file from feature matrices
    Construct(ConstructArgs),
    /// Randomized pipeline-vs-oracle equivalence check
    Verify(VerifyArgs),
    /// Analytical cycle and DDR traffic estimates
    Cycles(CyclesArgs),
    /// Time streaming pipeline against the naive full-sort baseline
    Bench(BenchArgs),
}

#[derive(Args)]
struct ConstructArgs {
    /// Node feature matrix (DIGC f32 file)
    #[arg(long)]
    x: PathBuf,
    /// Co-node feature matrix; omitted means Y = X
    #[arg(long)]
    y: Option<PathBuf>,
    /// Positional bias matrix; omitted means all-zero bias
    #[arg(long)]
    bias: Option<PathBuf>,
    #[arg(long)]
    k: usize,
    /// Dilation factor
    #[arg(long)]
    d: usize,
    /// Co-node partition width; default min(28, M)
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 64)]
    max_n: usize,
    #[arg(long, default_value_t = 32)]
    max_d_feat: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Negative control: flip the local-sort tie-break (must fail)
    #[arg(long, hide = true)]
    inject_tie_fault: bool,
}

#[derive(Args)]
struct CyclesArgs {
    /// Preset name (e.g. vig-ti-iso); alternative to the explicit dimensions
    #[arg(long)]
    preset: Option<String>,
    /// Square input resolution in pixels, used with --preset
    #[arg(long)]
    resolution: Option<usize>,
    /// Preset layer index
    #[arg(long, default_value_t = 0)]
    layer: usize,
    /// Node count N
    #[arg(long)]
    n: Option<usize>,
    /// Co-node count M
    #[arg(long)]
    m_nodes: Option<usize>,
    /// Feature dimension D
    #[arg(long)]
    d_feat: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    dilation: Option<usize>,
    /// Partition width m
    #[arg(long)]
    part_m: Option<usize>,
    #[arg(long, default_value_t = 8)]
    prow: usize,
    #[arg(long, default_value_t = 8)]
    pcol: usize,
    #[arg(long, default_value_t = 8)]
    pvec: usize,
    #[arg(long, default_value_t = 8)]
    psort: usize,
    /// Report latency at this clock frequency (MHz)
    #[arg(long)]
    freq_mhz: Option<f64>,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated node counts, e.g. 256,512,1024,2048
    #[arg(long)]
    sizes: String,
    #[arg(long, default_value_t = 64)]
    d_feat: usize,
    #[arg(long, default_value_t = 8)]
    k: usize,
    #[arg(long, default_value_t = 2)]
    dilation: usize,
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    csv: PathBuf,
}

fn exit_code_for(err: &DigcError) -> u8 {
    match err {
        DigcError::Io(_) => EXIT_IO,
        _ => EXIT_VALIDATION,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Construct(args) => cmd_construct(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Cycles(args) => cmd_cycles(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn cmd_construct(args: ConstructArgs) -> digc::Result<u8> {
    let x = ingest::load_matrix(&args.x)?;
    let y = match &args.y {
        Some(path) => ingest::load_matrix(path)?,
        None => x.clone(),
    };
    let bias = match &args.bias {
        Some(path) => {
            let b = ingest::load_matrix(path)?;
            PosBias::dense(b.rows(), b.cols(), b.data().to_vec())?
        }
        None => PosBias::zero(x.rows(), y.rows()),
    };
    let cfg = GraphConfig::new(args.k, args.d)?;
    let plan = match args.m {
        Some(m) => PartitionPlan::new(m, y.rows(), 8, 8, 8, 8)?,
        None => pipeline::plan_default(y.rows(), cfg)?,
    };
    let t0 = Instant::now();
    let out = pipeline::run_pipeline(&x, &y, &bias, cfg, &plan, args.workers)?;
    let elapsed_ms = t0.elapsed().as_secs_f64() * 1e3;
    ingest::save_neighbors(&out, &args.out)?;
    println!(
        "n={}, m={}, k={}, d={}, q={}, elapsed_ms={:.3}",
        x.rows(),
        plan.m,
        cfg.k,
        cfg.d,
        plan.q,
        elapsed_ms
    );
    Ok(0)
}

fn cmd_verify(args: VerifyArgs) -> digc::Result<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut failures = 0usize;
    for trial in 0..args.trials {
        let inst = if args.inject_tie_fault {
            tie_heavy_instance(&mut rng)
        } else {
            synthetic::random_instance(&mut rng, args.max_n, args.max_d_feat)
        };
        let workers = *[1usize, 2, 8].get(rng.gen_range(0..3)).unwrap();
        println!(
            "trial={} n={} m={} d_feat={} k={} d={} part_m={} workers={}",
            trial,
            inst.x.rows(),
            inst.y.rows(),
            inst.x.cols(),
            inst.cfg.k,
            inst.cfg.d,
            inst.plan.m,
            workers
        );
        let expect = oracle::serial_digc(&inst.x, &inst.y, &inst.bias, inst.cfg)?;
        let got = if args.inject_tie_fault {
            pipeline::run_pipeline_tie_faulted(
                &inst.x, &inst.y, &inst.bias, inst.cfg, &inst.plan, workers,
            )?
        } else {
            pipeline::run_pipeline(&inst.x, &inst.y, &inst.bias, inst.cfg, &inst.plan, workers)?
        };
        if got != expect {
            failures += 1;
            eprintln!(
                "mismatch: seed={} trial={} n={} m={} d_feat={} k={} d={} part_m={} p_row={} workers={}",
                args.seed,
                trial,
                inst.x.rows(),
                inst.y.rows(),
                inst.x.cols(),
                inst.cfg.k,
                inst.cfg.d,
                inst.plan.m,
                inst.plan.p_row,
                workers
            );
            println!("trials={} failures={}", args.trials, failures);
            return Ok(EXIT_MISMATCH);
        }
    }
    println!("trials={} failures=0", args.trials);
    Ok(0)
}

/// All co-node rows identical, so every distance ties and any tie-break
/// deviation is observable.
fn tie_heavy_instance(rng: &mut ChaCha8Rng) -> synthetic::Instance {
    let n = 4;
    let m = 32;
    let d_feat = 2;
    let x = synthetic::random_matrix(rng, n, d_feat);
    let y = FeatureMatrix::new(m, d_feat, vec![0.5; m * d_feat]).expect("valid");
    synthetic::Instance {
        bias: PosBias::zero(n, m),
        cfg: GraphConfig::new(2, 1).expect("legal"),
        plan: PartitionPlan::new(8, m, 2, 1, 1, 1).expect("legal"),
        x,
        y,
    }
}

fn cmd_cycles(args: CyclesArgs) -> digc::Result<u8> {
    let (n, m_nodes, d_feat, k, plan) = match &args.preset {
        Some(name) => {
            let res = args.resolution.ok_or_else(|| {
                DigcError::InvalidPlan("--resolution is required with --preset".into())
            })?;
            let layer = ingest::Presets::builtin().resolve(name, res, res, args.layer)?;
            let cfg = GraphConfig::new(layer.k, layer.d)?;
            let plan = pipeline::plan_default(layer.m, cfg)?;
            (layer.n, layer.m, layer.d_feat, layer.k, plan)
        }
        None => {
            let missing =
                || DigcError::InvalidPlan("--n, --m-nodes, --d-feat, --k are required".into());
            let n = args.n.ok_or_else(missing)?;
            let m_nodes = args.m_nodes.ok_or_else(missing)?;
            let d_feat = args.d_feat.ok_or_else(missing)?;
            let k = args.k.ok_or_else(missing)?;
            let part_m = args.part_m.unwrap_or_else(|| 28.min(m_nodes));
            let plan = PartitionPlan::new(
                part_m, m_nodes, args.prow, args.pcol, args.pvec, args.psort,
            )?;
            (n, m_nodes, d_feat, k, plan)
        }
    };
    let est = perfmodel::estimate_cycles(n, m_nodes, d_feat, k, &plan)?;
    print!("{}", est.to_kv());
    if let Some(mhz) = args.freq_mhz {
        let hz = mhz * 1e6;
        println!(
            "latency_serial_s={:.9}",
            est.latency_at(est.serial_total(), hz)
        );
        println!(
            "latency_pipelined_s={:.9}",
            est.latency_at(est.pipelined_bound(), hz)
        );
    }
    Ok(0)
}

fn cmd_bench(args: BenchArgs) -> digc::Result<u8> {
    let sizes: Vec<usize> = args
        .sizes
        .split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| DigcError::InvalidPlan(format!("bad size {s:?}")))
        })
        .collect::<digc::Result<_>>()?;
    let rows = bench::run_bench(
        &sizes,
        args.d_feat,
        args.k,
        args.dilation,
        args.repeats,
        args.workers,
        args.seed,
    )?;
    let mut writer = BufWriter::new(File::create(&args.csv)?);
    bench::write_csv(&mut writer, &rows)?;
    for row in &rows {
        println!("{}", row.to_csv());
    }
    Ok(0)
}
