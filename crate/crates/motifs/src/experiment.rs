//! Reproducible experiment driver: enumeration with cached ground truth,
//! multi-run sampling with derived per-run seeds, method comparisons at
//! equalized budget, and the null-model scoring pipeline.
//!
//! Runs are distributed over the worker pool but reduced in run-index
//! order with fixed formatting, so (config, seed) determine every output
//! byte regardless of worker count. Experiments operate on the largest
//! connected component of the input, which the walkers require.

use std::collections::HashMap;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::canon::{CanonicalCode, ClassId, ClassRegistry};
use crate::estimate::{
    error_report, guise_size_slice, ht_edge_estimate, ht_node_estimate, ht_reduce_estimate,
    plain_average, ConcentrationVector, ErrorReport,
};
use crate::exact::{exact_class_counts, rand_esu, ClassCounts};
use crate::graph::{GraphMode, LabeledGraph};
use crate::nullmodel::{
    estimate_joint_degree_dist, z_scores, NullOptions, NullSource, ZScoreReport,
};
use crate::oracle::{LatencyModel, OracleStats, QueryBudget, QueryOracle};
use crate::walk::{run_guise, run_mhsrw, run_mss, run_psrw, run_srw, GuiseRegistries, WalkConfig};
use crate::{fixtures, par, Error, Result};

pub const LIBRARY_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Everything one experiment needs; serialized verbatim into the run
/// manifest stored beside the results.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub graph: PathBuf,
    pub mode: GraphMode,
    pub methods: Vec<String>,
    pub k: usize,
    pub steps: Option<u64>,
    pub budget_nodes: Option<u64>,
    pub budget_ms: Option<f64>,
    pub query_delay_ms: f64,
    pub step_compute_ms: f64,
    pub runs: usize,
    pub seed: u64,
    pub burn_in: u64,
    pub lazy: bool,
    /// Split single-size methods across sizes 3/4/5 in comparisons.
    pub joint: bool,
    /// Depth survival probabilities for the pruning sampler.
    pub esu_probs: Option<Vec<f64>>,
    pub n_random: usize,
    pub jdd_steps: u64,
    pub exact_cap: u64,
    pub out: PathBuf,
    pub truth: Option<PathBuf>,
    pub dump_traces: bool,
}

impl ExperimentConfig {
    pub fn new(graph: impl Into<PathBuf>, out: impl Into<PathBuf>) -> ExperimentConfig {
        ExperimentConfig {
            graph: graph.into(),
            mode: GraphMode::Undirected,
            methods: vec!["psrw".into()],
            k: 3,
            steps: None,
            budget_nodes: None,
            budget_ms: None,
            query_delay_ms: 0.0,
            step_compute_ms: 0.0,
            runs: 200,
            seed: 1,
            burn_in: 0,
            lazy: false,
            joint: false,
            esu_probs: None,
            n_random: 100,
            jdd_steps: 100_000,
            exact_cap: 3_000_000,
            out: out.into(),
            truth: None,
            dump_traces: false,
        }
    }

    fn budget(&self) -> QueryBudget {
        QueryBudget {
            limit_nodes: self.budget_nodes,
            limit_ms: self.budget_ms,
        }
    }

    fn latency(&self) -> LatencyModel {
        LatencyModel {
            per_query_ms: self.query_delay_ms,
            per_step_compute_ms: self.step_compute_ms,
        }
    }

    /// Steps per chain; budget-limited chains get a generous cap so they
    /// terminate even after the whole graph is cached.
    fn effective_steps(&self) -> Result<u64> {
        if let Some(s) = self.steps {
            return Ok(s);
        }
        if let Some(b) = self.budget_nodes {
            return Ok(b.saturating_mul(32).clamp(10_000, 5_000_000));
        }
        if self.budget_ms.is_some() {
            return Ok(1_000_000);
        }
        Err(Error::InvalidConfig(
            "set steps, budget-nodes, or budget-ms".into(),
        ))
    }
}

/// Load the dataset and restrict to its largest connected component.
pub fn load_dataset(cfg: &ExperimentConfig) -> Result<LabeledGraph> {
    let file = fs::File::open(&cfg.graph)?;
    let g = crate::graph::load_edge_list(BufReader::new(file), cfg.mode)?;
    Ok(g.largest_connected_component())
}

fn parse_hex_code(hex: &str) -> CanonicalCode {
    CanonicalCode::from_bytes(
        hex.chars()
            .map(|c| c.to_digit(16).unwrap_or(0) as u8)
            .collect(),
    )
}

// ---------------------------------------------------------------------------
// ground truth

pub fn truth_file_name(k: usize, mode: GraphMode) -> String {
    format!("truth_k{}_{}.tsv", k, mode.as_str())
}

/// Exact class counts written as a text table keyed by the graph hash.
pub fn write_ground_truth(
    path: &Path,
    graph_hash: u64,
    counts: &ClassCounts,
    registry: &ClassRegistry,
) -> Result<()> {
    let mut out = format!(
        "# graph_hash {:016x} mode {} k {} total {}\n",
        graph_hash,
        registry.mode().as_str(),
        counts.k,
        counts.total
    );
    out.push_str("class_id\tcode\tcount\tconcentration\n");
    let by_id: HashMap<ClassId, u64> = counts.counts.iter().copied().collect();
    for info in registry.snapshot() {
        let c = by_id.get(&info.id).copied().unwrap_or(0);
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            info.id,
            info.code.hex(),
            c,
            c as f64 / counts.total as f64
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Parsed ground-truth table.
pub struct GroundTruth {
    pub graph_hash: u64,
    pub k: usize,
    pub mode: GraphMode,
    pub total: u64,
    pub vector: ConcentrationVector,
}

pub fn read_ground_truth(path: &Path) -> Result<GroundTruth> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Parse {
        line: 1,
        msg: "empty".into(),
    })?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let expect = |cond: bool, line: usize, msg: &str| -> Result<()> {
        if cond {
            Ok(())
        } else {
            Err(Error::Parse {
                line,
                msg: msg.to_string(),
            })
        }
    };
    expect(
        fields.len() == 9 && fields[0] == "#",
        1,
        "bad ground-truth header",
    )?;
    let graph_hash = u64::from_str_radix(fields[2], 16).map_err(|_| Error::Parse {
        line: 1,
        msg: "bad hash".into(),
    })?;
    let mode: GraphMode = fields[4].parse()?;
    let k: usize = fields[6].parse().map_err(|_| Error::Parse {
        line: 1,
        msg: "bad k".into(),
    })?;
    let total: u64 = fields[8].parse().map_err(|_| Error::Parse {
        line: 1,
        msg: "bad total".into(),
    })?;
    let mut shares = Vec::new();
    for (i, line) in lines.enumerate() {
        if i == 0 && line.starts_with("class_id") {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        expect(cols.len() == 4, i + 2, "bad ground-truth row")?;
        let class_id: ClassId = cols[0].parse().map_err(|_| Error::Parse {
            line: i + 2,
            msg: "bad id".into(),
        })?;
        let count: u64 = cols[2].parse().map_err(|_| Error::Parse {
            line: i + 2,
            msg: "bad count".into(),
        })?;
        shares.push(crate::estimate::ClassShare {
            class_id,
            code: parse_hex_code(cols[1]),
            value: count as f64 / total as f64,
            observed: count > 0,
        });
    }
    Ok(GroundTruth {
        graph_hash,
        k,
        mode,
        total,
        vector: ConcentrationVector {
            k,
            mode,
            shares,
            total_samples: total,
        },
    })
}

pub struct EnumerateOutcome {
    pub counts: ClassCounts,
    pub vector: ConcentrationVector,
    pub truth_path: PathBuf,
    pub registry_dynamic: bool,
}

/// Enumerate exactly and cache the result beside the other outputs.
pub fn cmd_enumerate(cfg: &ExperimentConfig) -> Result<EnumerateOutcome> {
    let g = load_dataset(cfg)?;
    cmd_enumerate_on(cfg, &g)
}

/// Enumeration entry point for callers that already hold the graph.
pub fn cmd_enumerate_on(cfg: &ExperimentConfig, g: &LabeledGraph) -> Result<EnumerateOutcome> {
    let registry = ClassRegistry::build(cfg.k, cfg.mode);
    let counts = exact_class_counts(g, cfg.k, &registry)?;
    let vector = ConcentrationVector::from_counts(&counts, &registry);
    fs::create_dir_all(&cfg.out)?;
    let truth_path = cfg.out.join(truth_file_name(cfg.k, cfg.mode));
    write_ground_truth(&truth_path, g.content_hash(), &counts, &registry)?;
    let registry_path = cfg
        .out
        .join(format!("registry_k{}_{}.tsv", cfg.k, cfg.mode.as_str()));
    fs::write(&registry_path, registry.export_table())?;
    Ok(EnumerateOutcome {
        counts,
        vector,
        truth_path,
        registry_dynamic: registry.is_dynamic(),
    })
}

// ---------------------------------------------------------------------------
// sampling

/// One chain's estimates, one vector per estimated size.
#[derive(Debug)]
pub struct RunRecord {
    pub run_index: usize,
    pub truncated: bool,
    pub stats: OracleStats,
    pub estimates: Vec<(usize, ConcentrationVector)>,
}

#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub class_id: ClassId,
    pub code: CanonicalCode,
    pub mean: f64,
    pub truth: Option<f64>,
    pub nrmse: Option<f64>,
}

#[derive(Debug)]
pub struct SizeSummary {
    pub k: usize,
    pub rows: Vec<SummaryRow>,
    pub report: Option<ErrorReport>,
}

pub struct SampleOutcome {
    pub method: String,
    pub per_run: Vec<RunRecord>,
    pub summaries: Vec<SizeSummary>,
    pub files: Vec<PathBuf>,
}

fn method_sizes(method: &str, k: usize) -> Vec<usize> {
    match method {
        "mss" => vec![k - 1, k, k + 1],
        "guise" => vec![3, 4, 5],
        _ => vec![k],
    }
}

fn build_registries(mode: GraphMode, sizes: &[usize]) -> HashMap<usize, ClassRegistry> {
    sizes
        .iter()
        .map(|&s| (s, ClassRegistry::build(s, mode)))
        .collect()
}

enum RegRef<'a> {
    Shared(&'a ClassRegistry),
    Owned(ClassRegistry),
}

impl RegRef<'_> {
    fn get(&self) -> &ClassRegistry {
        match self {
            RegRef::Shared(r) => r,
            RegRef::Owned(r) => r,
        }
    }
}

/// Built-in registries are shared across runs; dynamic ones are rebuilt
/// per run so first-seen ids stay deterministic per run.
fn reg_for<'a>(
    shared: &'a HashMap<usize, ClassRegistry>,
    size: usize,
    mode: GraphMode,
) -> RegRef<'a> {
    let template = &shared[&size];
    if template.is_dynamic() {
        RegRef::Owned(ClassRegistry::build(size, mode))
    } else {
        RegRef::Shared(template)
    }
}

fn run_one(
    g: &LabeledGraph,
    cfg: &ExperimentConfig,
    method: &str,
    run_index: usize,
    shared: &HashMap<usize, ClassRegistry>,
    dump_dir: Option<&Path>,
) -> Result<RunRecord> {
    let mut oracle = QueryOracle::new(g, cfg.budget(), cfg.latency());
    let wcfg = WalkConfig {
        k: cfg.k,
        steps: cfg.effective_steps()?,
        burn_in: cfg.burn_in,
        seed: cfg.seed,
        stream: run_index as u64,
        start: None,
        lazy: cfg.lazy,
    };
    let dump = |body: String| -> Result<()> {
        if let Some(dir) = dump_dir {
            fs::write(dir.join(format!("trace_run_{run_index:04}.txt")), body)?;
        }
        Ok(())
    };
    let mut estimates = Vec::new();
    let truncated;
    match method {
        "srw" => {
            let reg = reg_for(shared, cfg.k, cfg.mode);
            let t = run_srw(&mut oracle, reg.get(), &wcfg)?;
            truncated = t.truncated;
            dump(dump_walk_trace(&t))?;
            estimates.push((cfg.k, ht_node_estimate(&t, reg.get())?));
        }
        "psrw" => {
            let reg = reg_for(shared, cfg.k, cfg.mode);
            let t = run_psrw(&mut oracle, reg.get(), &wcfg)?;
            truncated = t.truncated;
            dump(dump_pair_trace(&t))?;
            estimates.push((cfg.k, ht_edge_estimate(&t, reg.get())?));
        }
        "mhsrw" => {
            let reg = reg_for(shared, cfg.k, cfg.mode);
            let t = run_mhsrw(&mut oracle, reg.get(), &wcfg)?;
            truncated = t.truncated;
            dump(dump_walk_trace(&t))?;
            estimates.push((cfg.k, plain_average(&t, reg.get())?));
        }
        "mss" => {
            let lower = reg_for(shared, cfg.k - 1, cfg.mode);
            let mid = reg_for(shared, cfg.k, cfg.mode);
            let upper = reg_for(shared, cfg.k + 1, cfg.mode);
            let t = run_mss(&mut oracle, lower.get(), mid.get(), upper.get(), &wcfg)?;
            truncated = t.node.truncated;
            dump(dump_walk_trace(&t.node))?;
            estimates.push((cfg.k - 1, ht_reduce_estimate(&t.reduce, lower.get())?));
            estimates.push((cfg.k, ht_node_estimate(&t.node, mid.get())?));
            estimates.push((cfg.k + 1, ht_edge_estimate(&t.pair, upper.get())?));
        }
        "guise" => {
            let r3 = reg_for(shared, 3, cfg.mode);
            let r4 = reg_for(shared, 4, cfg.mode);
            let r5 = reg_for(shared, 5, cfg.mode);
            let regs = GuiseRegistries {
                three: r3.get(),
                four: r4.get(),
                five: r5.get(),
            };
            let t = run_guise(&mut oracle, &regs, &wcfg)?;
            truncated = t.truncated;
            dump(
                t.samples
                    .iter()
                    .enumerate()
                    .map(|(i, s)| {
                        format!(
                            "{i}\t{}\t{}\t{}\tsize={}\n",
                            s.key, s.class_id, s.degree, s.size
                        )
                    })
                    .collect(),
            )?;
            estimates.push((3, guise_size_slice(&t, 3, r3.get())?));
            estimates.push((4, guise_size_slice(&t, 4, r4.get())?));
            estimates.push((5, guise_size_slice(&t, 5, r5.get())?));
        }
        "rand_esu" => {
            let reg = reg_for(shared, cfg.k, cfg.mode);
            let probs = cfg
                .esu_probs
                .clone()
                .unwrap_or_else(|| default_esu_probs(cfg.k));
            let mut rng = {
                use rand::SeedableRng;
                let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);
                r.set_stream(run_index as u64);
                r
            };
            let out = rand_esu(&mut oracle, cfg.k, &probs, &mut rng)?;
            truncated = out.truncated;
            if out.samples.is_empty() {
                return Err(Error::EmptyTrace);
            }
            let mut weights: HashMap<ClassId, f64> = HashMap::new();
            for (cis, _) in &out.samples {
                *weights.entry(reg.get().classify(cis)?).or_insert(0.0) += 1.0;
            }
            let v = ConcentrationVector::from_class_weights(
                cfg.k,
                reg.get(),
                &weights,
                out.samples.len() as f64,
                out.samples.len() as u64,
            );
            estimates.push((cfg.k, v));
        }
        other => {
            return Err(Error::InvalidConfig(format!("unknown method `{other}`")));
        }
    }
    Ok(RunRecord {
        run_index,
        truncated,
        stats: oracle.stats(),
        estimates,
    })
}

fn dump_walk_trace(t: &crate::walk::WalkTrace) -> String {
    t.samples
        .iter()
        .enumerate()
        .map(|(i, s)| format!("{i}\t{}\t{}\t{}\t\n", s.key, s.class_id, s.degree))
        .collect()
}

fn dump_pair_trace(t: &crate::walk::PairTrace) -> String {
    t.samples
        .iter()
        .enumerate()
        .map(|(i, s)| format!("{i}\t{}\t{}\t\ti_count={}\n", s.key, s.class_id, s.i_count))
        .collect()
}

/// Probabilities used when none are configured: explore every branch at
/// the upper levels and prune the last two with even odds.
pub fn default_esu_probs(k: usize) -> Vec<f64> {
    let mut p = vec![1.0; k];
    if k >= 2 {
        p[k - 1] = 0.5;
        p[k - 2] = 0.5;
    }
    p
}

fn summarize_size(
    size_k: usize,
    vectors: &[&ConcentrationVector],
    builtin: bool,
    truth: Option<&ConcentrationVector>,
) -> Result<SizeSummary> {
    let runs = vectors.len() as f64;
    let mut rows: Vec<SummaryRow> = if builtin {
        // shares align index-by-index across runs
        let first = vectors[0];
        first
            .shares
            .iter()
            .enumerate()
            .map(|(i, share)| SummaryRow {
                class_id: share.class_id,
                code: share.code.clone(),
                mean: vectors.iter().map(|v| v.shares[i].value).sum::<f64>() / runs,
                truth: None,
                nrmse: None,
            })
            .collect()
    } else {
        // dynamic registries: join runs by code, renumber by (edges, code)
        let mut sums: HashMap<CanonicalCode, f64> = HashMap::new();
        for v in vectors {
            for share in &v.shares {
                *sums.entry(share.code.clone()).or_insert(0.0) += share.value;
            }
        }
        let mut codes: Vec<(CanonicalCode, f64)> = sums.into_iter().collect();
        codes.sort_by(|a, b| (a.0.edge_count(), &a.0).cmp(&(b.0.edge_count(), &b.0)));
        codes
            .into_iter()
            .enumerate()
            .map(|(i, (code, sum))| SummaryRow {
                class_id: (i + 1) as ClassId,
                code,
                mean: sum / runs,
                truth: None,
                nrmse: None,
            })
            .collect()
    };
    let mut report = None;
    if let Some(truth) = truth {
        let owned: Vec<ConcentrationVector> = vectors.iter().map(|&v| v.clone()).collect();
        let rep = error_report(&owned, truth)?;
        for row in &mut rows {
            if let Some(tshare) = truth.shares.iter().find(|s| s.code == row.code) {
                row.truth = Some(tshare.value);
                row.nrmse = rep.class_error(tshare.class_id);
            }
        }
        report = Some(rep);
    }
    Ok(SizeSummary {
        k: size_k,
        rows,
        report,
    })
}

fn estimate_csv(vector: &ConcentrationVector) -> String {
    let mut out = String::from("class_id,code,estimate\n");
    for s in &vector.shares {
        out.push_str(&format!("{},{},{}\n", s.class_id, s.code.hex(), s.value));
    }
    out
}

fn summary_csv(summary: &SizeSummary) -> String {
    let mut out = String::from("class_id,code,mean_estimate,truth,nrmse\n");
    for r in &summary.rows {
        let truth = r.truth.map(|v| v.to_string()).unwrap_or_default();
        let nrmse = r.nrmse.map(|v| v.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.class_id,
            r.code.hex(),
            r.mean,
            truth,
            nrmse
        ));
    }
    out
}

#[derive(Serialize)]
struct RunStatsOut {
    run: usize,
    distinct_queried: u64,
    simulated_elapsed_ms: f64,
    cache_hits: u64,
    truncated: bool,
}

#[derive(Serialize)]
struct Manifest<'a> {
    library_version: &'a str,
    command: &'a str,
    config: &'a ExperimentConfig,
    graph_hash: String,
    graph_nodes: usize,
    graph_edges: u64,
    registry_dynamic: Vec<(usize, bool)>,
    runs: Vec<RunStatsOut>,
    outputs: Vec<String>,
}

fn write_manifest(
    cfg: &ExperimentConfig,
    command: &str,
    g: &LabeledGraph,
    reg_dynamic: Vec<(usize, bool)>,
    per_run: &[RunRecord],
    outputs: &[PathBuf],
) -> Result<PathBuf> {
    let manifest = Manifest {
        library_version: LIBRARY_VERSION,
        command,
        config: cfg,
        graph_hash: format!("{:016x}", g.content_hash()),
        graph_nodes: g.node_count(),
        graph_edges: g.edge_count(),
        registry_dynamic: reg_dynamic,
        runs: per_run
            .iter()
            .map(|r| RunStatsOut {
                run: r.run_index,
                distinct_queried: r.stats.distinct_queried,
                simulated_elapsed_ms: r.stats.simulated_elapsed_ms,
                cache_hits: r.stats.cache_hits,
                truncated: r.truncated,
            })
            .collect(),
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
    };
    let path = cfg.out.join("manifest.json");
    fs::write(
        &path,
        serde_json::to_string_pretty(&manifest).expect("serializable"),
    )?;
    Ok(path)
}

fn load_truth_vector(cfg: &ExperimentConfig, size: usize) -> Option<ConcentrationVector> {
    let path = cfg.truth.clone().or_else(|| {
        let p = cfg.out.join(truth_file_name(size, cfg.mode));
        p.exists().then_some(p)
    })?;
    read_ground_truth(&path)
        .ok()
        .filter(|t| t.k == size)
        .map(|t| t.vector)
}

/// Run `cfg.runs` independent chains of one method and summarize.
pub fn cmd_sample(cfg: &ExperimentConfig) -> Result<SampleOutcome> {
    let g = load_dataset(cfg)?;
    cmd_sample_on(cfg, &g)
}

pub fn cmd_sample_on(cfg: &ExperimentConfig, g: &LabeledGraph) -> Result<SampleOutcome> {
    if cfg.runs < 1 {
        return Err(Error::InvalidConfig("need at least one run".into()));
    }
    let method = cfg
        .methods
        .first()
        .cloned()
        .ok_or_else(|| Error::InvalidConfig("no method given".into()))?;
    cfg.effective_steps()?;
    let sizes = method_sizes(&method, cfg.k);
    let shared = build_registries(cfg.mode, &sizes);
    fs::create_dir_all(&cfg.out)?;
    let dump_dir = cfg.dump_traces.then(|| cfg.out.clone());
    let results: Vec<Result<RunRecord>> = par::map_indexed(cfg.runs, |i| {
        run_one(g, cfg, &method, i, &shared, dump_dir.as_deref())
    });
    let per_run: Vec<RunRecord> = results.into_iter().collect::<Result<Vec<_>>>()?;

    let mut files = Vec::new();
    for record in &per_run {
        let path = cfg.out.join(format!("run_{:04}.csv", record.run_index));
        let mut body = String::new();
        for (size, vector) in &record.estimates {
            body.push_str(&format!("# k {}\n", size));
            body.push_str(&estimate_csv(vector));
        }
        fs::write(&path, body)?;
        files.push(path);
    }

    let mut summaries = Vec::new();
    for (pos, &size) in sizes.iter().enumerate() {
        let vectors: Vec<&ConcentrationVector> =
            per_run.iter().map(|r| &r.estimates[pos].1).collect();
        let truth = load_truth_vector(cfg, size);
        let builtin = !shared[&size].is_dynamic();
        let summary = summarize_size(size, &vectors, builtin, truth.as_ref())?;
        let path = cfg.out.join(format!("summary_k{}.csv", size));
        fs::write(&path, summary_csv(&summary))?;
        files.push(path);
        summaries.push(summary);
    }

    let reg_dynamic = sizes
        .iter()
        .map(|&s| (s, shared[&s].is_dynamic()))
        .collect();
    let manifest = write_manifest(cfg, "sample", g, reg_dynamic, &per_run, &files)?;
    files.push(manifest);
    Ok(SampleOutcome {
        method,
        per_run,
        summaries,
        files,
    })
}

// ---------------------------------------------------------------------------
// comparison

#[derive(Debug)]
pub struct SizeMetrics {
    pub k: usize,
    pub rmse: f64,
    pub mean_nrmse: f64,
    pub summary: SizeSummary,
}

#[derive(Debug)]
pub struct MethodMetrics {
    pub method: String,
    pub per_size: Vec<SizeMetrics>,
}

pub struct CompareOutcome {
    pub methods: Vec<MethodMetrics>,
    pub files: Vec<PathBuf>,
}

/// Run every configured method at the same budget and tabulate per-class
/// relative errors plus per-size vector errors against exact truth.
/// Single-size methods run once at `cfg.k`, or, with `joint`, once per
/// size in 3/4/5 with the node budget split evenly.
pub fn cmd_compare(cfg: &ExperimentConfig) -> Result<CompareOutcome> {
    let g = load_dataset(cfg)?;
    cmd_compare_on(cfg, &g)
}

pub fn cmd_compare_on(cfg: &ExperimentConfig, g: &LabeledGraph) -> Result<CompareOutcome> {
    if cfg.methods.is_empty() {
        return Err(Error::InvalidConfig(
            "compare needs at least one method".into(),
        ));
    }
    fs::create_dir_all(&cfg.out)?;
    let mut truth_cache: HashMap<usize, ConcentrationVector> = HashMap::new();
    let mut truth_for = |size: usize| -> Result<ConcentrationVector> {
        if let Some(v) = truth_cache.get(&size) {
            return Ok(v.clone());
        }
        let v = match load_truth_vector(cfg, size) {
            Some(v) => v,
            None => {
                let reg = ClassRegistry::build(size, cfg.mode);
                let counts = exact_class_counts(g, size, &reg)?;
                ConcentrationVector::from_counts(&counts, &reg)
            }
        };
        truth_cache.insert(size, v.clone());
        Ok(v)
    };

    let mut methods_out = Vec::new();
    for method in &cfg.methods {
        let multi = matches!(method.as_str(), "mss" | "guise");
        let mut per_size = Vec::new();
        if multi {
            let sub = ExperimentConfig {
                methods: vec![method.clone()],
                ..cfg.clone()
            };
            let outcome = sample_in_memory(&sub, g)?;
            for (pos, &size) in method_sizes(method, cfg.k).iter().enumerate() {
                let truth = truth_for(size)?;
                let vectors: Vec<&ConcentrationVector> =
                    outcome.iter().map(|r| &r.estimates[pos].1).collect();
                per_size.push(metrics_for(size, &vectors, &truth)?);
            }
        } else if cfg.joint {
            for &size in &[3usize, 4, 5] {
                let sub = ExperimentConfig {
                    methods: vec![method.clone()],
                    k: size,
                    budget_nodes: cfg.budget_nodes.map(|b| b / 3),
                    budget_ms: cfg.budget_ms.map(|b| b / 3.0),
                    steps: cfg.steps.map(|s| s / 3),
                    ..cfg.clone()
                };
                let outcome = sample_in_memory(&sub, g)?;
                let truth = truth_for(size)?;
                let vectors: Vec<&ConcentrationVector> =
                    outcome.iter().map(|r| &r.estimates[0].1).collect();
                per_size.push(metrics_for(size, &vectors, &truth)?);
            }
        } else {
            let sub = ExperimentConfig {
                methods: vec![method.clone()],
                ..cfg.clone()
            };
            let outcome = sample_in_memory(&sub, g)?;
            let truth = truth_for(cfg.k)?;
            let vectors: Vec<&ConcentrationVector> =
                outcome.iter().map(|r| &r.estimates[0].1).collect();
            per_size.push(metrics_for(cfg.k, &vectors, &truth)?);
        }
        methods_out.push(MethodMetrics {
            method: method.clone(),
            per_size,
        });
    }

    let mut class_csv = String::from("method,k,class_id,code,truth,mean_estimate,nrmse\n");
    let mut rmse_csv = String::from("method,k,rmse,mean_nrmse\n");
    for m in &methods_out {
        for sm in &m.per_size {
            rmse_csv.push_str(&format!(
                "{},{},{},{}\n",
                m.method, sm.k, sm.rmse, sm.mean_nrmse
            ));
            for row in &sm.summary.rows {
                class_csv.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    m.method,
                    sm.k,
                    row.class_id,
                    row.code.hex(),
                    row.truth.map(|v| v.to_string()).unwrap_or_default(),
                    row.mean,
                    row.nrmse.map(|v| v.to_string()).unwrap_or_default(),
                ));
            }
        }
    }
    let class_path = cfg.out.join("compare_classes.csv");
    let rmse_path = cfg.out.join("compare_rmse.csv");
    fs::write(&class_path, class_csv)?;
    fs::write(&rmse_path, rmse_csv)?;
    Ok(CompareOutcome {
        methods: methods_out,
        files: vec![class_path, rmse_path],
    })
}

/// Sampling without touching the filesystem (used by compare and tests).
pub fn sample_in_memory(cfg: &ExperimentConfig, g: &LabeledGraph) -> Result<Vec<RunRecord>> {
    let method = cfg
        .methods
        .first()
        .cloned()
        .ok_or_else(|| Error::InvalidConfig("no method given".into()))?;
    cfg.effective_steps()?;
    let sizes = method_sizes(&method, cfg.k);
    let shared = build_registries(cfg.mode, &sizes);
    let results: Vec<Result<RunRecord>> =
        par::map_indexed(cfg.runs, |i| run_one(g, cfg, &method, i, &shared, None));
    results.into_iter().collect()
}

fn metrics_for(
    size: usize,
    vectors: &[&ConcentrationVector],
    truth: &ConcentrationVector,
) -> Result<SizeMetrics> {
    let summary = summarize_size(size, vectors, true, Some(truth))?;
    let report = summary.report.as_ref().expect("truth given");
    Ok(SizeMetrics {
        k: size,
        rmse: report.rmse,
        mean_nrmse: report.mean_class_error(),
        summary,
    })
}

// ---------------------------------------------------------------------------
// z-scores

pub struct ZScoreOutcome {
    pub report: ZScoreReport,
    pub files: Vec<PathBuf>,
}

/// Full null-model pipeline: estimate the joint degree distribution by a
/// node walk, generate degree-preserving random graphs from it, compute
/// their concentrations, and score the observed concentrations.
pub fn cmd_zscore(cfg: &ExperimentConfig) -> Result<ZScoreOutcome> {
    let g = load_dataset(cfg)?;
    cmd_zscore_on(cfg, &g)
}

pub fn cmd_zscore_on(cfg: &ExperimentConfig, g: &LabeledGraph) -> Result<ZScoreOutcome> {
    let registry = ClassRegistry::build(cfg.k, cfg.mode);
    // observed concentrations: exact when affordable, sampled otherwise
    let est = match crate::exact::exact_class_counts_capped(g, cfg.k, &registry, cfg.exact_cap)? {
        Some(counts) => ConcentrationVector::from_counts(&counts, &registry),
        None => {
            let mut oracle = QueryOracle::new(g, cfg.budget(), cfg.latency());
            let wcfg = WalkConfig {
                k: cfg.k,
                steps: cfg.effective_steps().unwrap_or(100_000),
                burn_in: cfg.burn_in,
                seed: cfg.seed,
                stream: 0,
                start: None,
                lazy: cfg.lazy,
            };
            let trace = run_psrw(&mut oracle, &registry, &wcfg)?;
            ht_edge_estimate(&trace, &registry)?
        }
    };
    let mut oracle = QueryOracle::unlimited(g);
    let jdd = estimate_joint_degree_dist(&mut oracle, cfg.jdd_steps, cfg.seed ^ 0x00ff)?;
    let source = NullSource::Joint(jdd, g.node_count());
    let opts = NullOptions {
        exact_cap: cfg.exact_cap,
        psrw_steps: cfg.effective_steps().unwrap_or(20_000),
    };
    let report = z_scores(&est, &source, cfg.n_random, &registry, cfg.seed, opts)?;
    fs::create_dir_all(&cfg.out)?;
    let mut csv = String::from("class_id,omega,mu,sigma,z,method,n_random\n");
    for row in &report.rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.class_id,
            row.omega,
            row.mu,
            row.sigma,
            row.z
                .map(|z| z.to_string())
                .unwrap_or_else(|| "undefined".into()),
            report.null_method,
            report.n_random
        ));
    }
    let path = cfg.out.join(format!("zscores_k{}.csv", cfg.k));
    fs::write(&path, csv)?;
    Ok(ZScoreOutcome {
        report,
        files: vec![path],
    })
}

// ---------------------------------------------------------------------------
// fixtures

/// Write the bundled deterministic datasets as edge-list files.
pub fn cmd_fixture(out: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out)?;
    let mut files = Vec::new();
    for (name, g) in [
        ("hub5.txt", fixtures::hub5()),
        ("k4.txt", fixtures::k4()),
        ("p2p_small.txt", fixtures::p2p_small()),
        ("p2p.txt", fixtures::p2p_synthetic()),
    ] {
        let path = out.join(name);
        fs::write(&path, fixtures::to_edge_list(&g))?;
        files.push(path);
    }
    Ok(files)
}
