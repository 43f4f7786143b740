use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use motifs::experiment::{
    cmd_compare, cmd_enumerate, cmd_fixture, cmd_sample, cmd_zscore, ExperimentConfig,
};
use motifs::graph::GraphMode;

#[derive(Parser)]
#[command(
    name = "motifs",
    version,
    about = "Estimate connected-subgraph class concentrations by random walks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Edge-list file (whitespace-separated pairs, '#' comments)
    #[arg(long)]
    graph: PathBuf,
    /// Graph mode: undirected, directed, or signed
    #[arg(long, default_value = "undirected")]
    mode: String,
    /// Subgraph size k
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
    /// Master seed
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args, Clone)]
struct BudgetArgs {
    /// Walk steps per run (B)
    #[arg(long)]
    steps: Option<u64>,
    /// Distinct-node query budget per run (B*)
    #[arg(long)]
    budget_nodes: Option<u64>,
    /// Simulated time budget per run, milliseconds
    #[arg(long)]
    budget_ms: Option<f64>,
    /// Simulated per-query delay, milliseconds
    #[arg(long, default_value_t = 0.0)]
    query_delay_ms: f64,
    /// Simulated per-step compute cost, milliseconds
    #[arg(long, default_value_t = 0.0)]
    step_compute_ms: f64,
    /// Samples discarded at the start of each chain
    #[arg(long, default_value_t = 0)]
    burn_in: u64,
    /// Lazy walk (stay put with probability 1/2); bipartite safeguard
    #[arg(long, default_value_t = false)]
    lazy: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Exact enumeration: write ground-truth class counts and the registry table
    Enumerate {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run independent sampling chains and summarize their estimates
    Sample {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Method: srw, psrw, mss, mhsrw, guise, or rand_esu
        #[arg(long)]
        method: String,
        /// Independent runs
        #[arg(long, default_value_t = 200)]
        runs: usize,
        /// Ground-truth file for error columns (defaults to the cache in --out)
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Depth survival probabilities for rand_esu, comma separated
        #[arg(long)]
        esu_probs: Option<String>,
        /// Write per-run trace dumps beside the estimates
        #[arg(long, default_value_t = false)]
        dump_traces: bool,
    },
    /// Run several methods at the same budget and tabulate their errors
    Compare {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Comma-separated methods
        #[arg(long)]
        methods: String,
        #[arg(long, default_value_t = 200)]
        runs: usize,
        /// Also run single-size methods at sizes 3/4/5 with the budget split
        #[arg(long, default_value_t = false)]
        joint: bool,
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Degree-preserving null-model significance scores
    Zscore {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Number of random graphs
        #[arg(long, default_value_t = 100)]
        n_random: usize,
        /// Node-walk steps for the joint degree distribution estimate
        #[arg(long, default_value_t = 100_000)]
        jdd_steps: u64,
        /// Exact enumeration cap before falling back to sampling
        #[arg(long, default_value_t = 3_000_000)]
        exact_cap: u64,
    },
    /// Write the bundled deterministic datasets as edge-list files
    Fixture {
        #[arg(long)]
        out: PathBuf,
    },
}

fn base_config(common: &CommonArgs) -> Result<ExperimentConfig> {
    let mode: GraphMode = common.mode.parse().map_err(|e| anyhow::anyhow!("{e}"))?;
    let mut cfg = ExperimentConfig::new(&common.graph, &common.out);
    cfg.mode = mode;
    cfg.k = common.k;
    cfg.seed = common.seed;
    Ok(cfg)
}

fn apply_budget(cfg: &mut ExperimentConfig, b: &BudgetArgs) {
    cfg.steps = b.steps;
    cfg.budget_nodes = b.budget_nodes;
    cfg.budget_ms = b.budget_ms;
    cfg.query_delay_ms = b.query_delay_ms;
    cfg.step_compute_ms = b.step_compute_ms;
    cfg.burn_in = b.burn_in;
    cfg.lazy = b.lazy;
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Enumerate { common } => {
            let cfg = base_config(&common)?;
            let out = cmd_enumerate(&cfg).context("enumeration failed")?;
            if out.registry_dynamic {
                eprintln!(
                    "warning: no built-in registry for (k={}, {}); dynamic ids are not portable",
                    cfg.k, common.mode
                );
            }
            println!(
                "enumerated {} subgraphs of size {} into {} classes",
                out.counts.total,
                cfg.k,
                out.counts.counts.len()
            );
            println!("truth table: {}", out.truth_path.display());
        }
        Command::Sample {
            common,
            budget,
            method,
            runs,
            truth,
            esu_probs,
            dump_traces,
        } => {
            let mut cfg = base_config(&common)?;
            apply_budget(&mut cfg, &budget);
            cfg.methods = vec![method];
            cfg.runs = runs;
            cfg.truth = truth;
            cfg.dump_traces = dump_traces;
            if let Some(p) = esu_probs {
                let parsed: std::result::Result<Vec<f64>, _> =
                    p.split(',').map(str::parse).collect();
                cfg.esu_probs = Some(parsed.context("bad --esu-probs")?);
            }
            let out = cmd_sample(&cfg).context("sampling failed")?;
            for s in &out.summaries {
                let err = s
                    .report
                    .as_ref()
                    .map(|r| format!(", mean nrmse {:.4}", r.mean_class_error()))
                    .unwrap_or_default();
                println!("k={}: {} classes summarized{err}", s.k, s.rows.len());
            }
            println!(
                "wrote {} files under {}",
                out.files.len(),
                cfg.out.display()
            );
        }
        Command::Compare {
            common,
            budget,
            methods,
            runs,
            joint,
            truth,
        } => {
            let mut cfg = base_config(&common)?;
            apply_budget(&mut cfg, &budget);
            cfg.methods = methods.split(',').map(|s| s.trim().to_string()).collect();
            if cfg.methods.iter().any(String::is_empty) {
                bail!("empty method in --methods");
            }
            cfg.runs = runs;
            cfg.joint = joint;
            cfg.truth = truth;
            let out = cmd_compare(&cfg).context("comparison failed")?;
            println!("method\tk\trmse\tmean_nrmse");
            for m in &out.methods {
                for sm in &m.per_size {
                    println!(
                        "{}\t{}\t{:.6}\t{:.6}",
                        m.method, sm.k, sm.rmse, sm.mean_nrmse
                    );
                }
            }
        }
        Command::Zscore {
            common,
            budget,
            n_random,
            jdd_steps,
            exact_cap,
        } => {
            let mut cfg = base_config(&common)?;
            apply_budget(&mut cfg, &budget);
            cfg.n_random = n_random;
            cfg.jdd_steps = jdd_steps;
            cfg.exact_cap = exact_cap;
            if cfg.steps.is_none() && cfg.budget_nodes.is_none() && cfg.budget_ms.is_none() {
                cfg.steps = Some(20_000);
            }
            let out = cmd_zscore(&cfg).context("z-score pipeline failed")?;
            println!(
                "class\tomega\tmu\tsigma\tz ({} nulls, {})",
                out.report.n_random, out.report.null_method
            );
            for row in &out.report.rows {
                let z = row
                    .z
                    .map(|z| format!("{z:.3}"))
                    .unwrap_or_else(|| "undef".into());
                println!(
                    "{}\t{:.6}\t{:.6}\t{:.6}\t{}",
                    row.class_id, row.omega, row.mu, row.sigma, z
                );
            }
        }
        Command::Fixture { out } => {
            let files = cmd_fixture(&out)?;
            for f in files {
                println!("wrote {}", f.display());
            }
        }
    }
    Ok(())
}
