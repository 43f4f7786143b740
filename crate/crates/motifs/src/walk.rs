//! The sampling chains.
//!
//! All five processes are deterministic given (seed, stream): a plain
//! random walk on the k-node relationship graph (srw), the pairwise
//! variant that walks one size down and emits consecutive-state unions
//! (psrw), the mixed chain that feeds three sizes from one walk (mss), a
//! Metropolis-Hastings walk targeting the uniform distribution over
//! k-node subgraphs (mhsrw), and a Metropolis-Hastings walk over the
//! mixed 3/4/5-node subgraph graph (guise).
//!
//! Chains record the visited state before moving, so a trace of B steps
//! holds B samples (minus burn-in). Budget exhaustion truncates the trace
//! cleanly rather than failing the run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::canon::{ClassId, ClassRegistry};
use crate::cis::{Cis, CisKey};
use crate::graph::NodeId;
use crate::neighborhood::{
    contained_cises, containing_count, count_contained, extend_with, frontier, neighbor_cises,
    Frontier, NeighborSet,
};
use crate::oracle::{OracleStats, QueryOracle};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WalkMethod {
    Srw,
    Psrw,
    Mss,
    Mhsrw,
    Guise,
}

impl WalkMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            WalkMethod::Srw => "srw",
            WalkMethod::Psrw => "psrw",
            WalkMethod::Mss => "mss",
            WalkMethod::Mhsrw => "mhsrw",
            WalkMethod::Guise => "guise",
        }
    }
}

#[derive(Debug, Clone)]
pub struct WalkConfig {
    /// Target subgraph size (for psrw this is the emitted size; the walk
    /// itself runs one size down).
    pub k: usize,
    /// Number of walk steps B. Chains with a node or time budget may stop
    /// earlier.
    pub steps: u64,
    pub burn_in: u64,
    pub seed: u64,
    /// Per-run stream index; (seed, stream) fully determine the chain.
    pub stream: u64,
    pub start: Option<NodeId>,
    /// Lazy walk: stay put with probability 1/2 each step. Safeguard for
    /// the rare bipartite relationship-graph case; off by default.
    pub lazy: bool,
}

impl WalkConfig {
    pub fn new(k: usize, steps: u64, seed: u64) -> WalkConfig {
        WalkConfig {
            k,
            steps,
            burn_in: 0,
            seed,
            stream: 0,
            start: None,
            lazy: false,
        }
    }

    fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

#[derive(Debug, Clone)]
pub struct WalkSample {
    pub key: CisKey,
    pub class_id: ClassId,
    /// Relationship-graph degree of the sampled subgraph.
    pub degree: u64,
}

#[derive(Debug, Clone)]
pub struct WalkTrace {
    pub method: WalkMethod,
    pub k: usize,
    pub samples: Vec<WalkSample>,
    pub truncated: bool,
    pub stats: OracleStats,
}

/// Union of two consecutive walk states one size down.
#[derive(Debug, Clone)]
pub struct PairSample {
    pub key: CisKey,
    pub class_id: ClassId,
    /// Number of (k-1)-node subgraphs contained in the union.
    pub i_count: u64,
}

#[derive(Debug, Clone)]
pub struct PairTrace {
    pub k: usize,
    pub samples: Vec<PairSample>,
    pub truncated: bool,
    pub stats: OracleStats,
}

/// One contained subgraph observation inside a reduce sample.
#[derive(Debug, Clone, Copy)]
pub struct ReduceEntry {
    pub class_id: ClassId,
    /// Number of k-node subgraphs containing this (k-1)-node subgraph.
    pub containing: u64,
}

#[derive(Debug, Clone)]
pub struct ReduceSample {
    pub degree: u64,
    pub entries: Vec<ReduceEntry>,
}

#[derive(Debug, Clone)]
pub struct ReduceTrace {
    /// Estimated size (one below the walk size).
    pub k: usize,
    pub samples: Vec<ReduceSample>,
    pub truncated: bool,
    pub stats: OracleStats,
}

/// The three views produced by one mixed-size walk at size k.
#[derive(Debug)]
pub struct MssTraces {
    pub node: WalkTrace,
    pub pair: PairTrace,
    pub reduce: ReduceTrace,
}

#[derive(Debug, Clone)]
pub struct GuiseSample {
    pub key: CisKey,
    pub size: u8,
    pub class_id: ClassId,
    pub degree: u64,
}

#[derive(Debug, Clone)]
pub struct GuiseTrace {
    pub samples: Vec<GuiseSample>,
    pub truncated: bool,
    pub stats: OracleStats,
}

/// Registries for the mixed 3/4/5 walk.
type PendingUnion = (Cis, NodeId, Vec<(u8, crate::graph::EdgeLabel)>);

pub struct GuiseRegistries<'a> {
    pub three: &'a ClassRegistry,
    pub four: &'a ClassRegistry,
    pub five: &'a ClassRegistry,
}

impl<'a> GuiseRegistries<'a> {
    fn for_size(&self, k: usize) -> &'a ClassRegistry {
        match k {
            3 => self.three,
            4 => self.four,
            _ => self.five,
        }
    }
}

/// Initial subgraph: breadth-first from `start` (or a seeded random node),
/// taking the first k visited nodes. The front of the search keeps the
/// result connected. Queries at most k nodes.
pub fn seed_cis(
    oracle: &mut QueryOracle<'_>,
    k: usize,
    start: Option<NodeId>,
    rng: &mut impl Rng,
) -> Result<Cis> {
    let n = oracle.graph().node_count();
    if n < k || k == 0 {
        return Err(Error::GraphTooSmall { need: k, have: n });
    }
    let start = start.unwrap_or_else(|| rng.random_range(0..n as NodeId));
    if start as usize >= n {
        return Err(Error::NodeOutOfRange(start));
    }
    let mut visited = vec![start];
    let mut seen = vec![false; n];
    seen[start as usize] = true;
    let mut head = 0;
    'collect: while visited.len() < k {
        if head >= visited.len() {
            return Err(Error::GraphTooSmall {
                need: k,
                have: visited.len(),
            });
        }
        let v = visited[head];
        head += 1;
        let view = oracle.query(v)?;
        for &(u, _) in view.incident {
            if !seen[u as usize] {
                seen[u as usize] = true;
                visited.push(u);
                if visited.len() == k {
                    break 'collect;
                }
            }
        }
    }
    visited.sort_unstable();
    let mut edges = Vec::new();
    #[allow(clippy::needless_range_loop)]
    for i in 0..k {
        let view = oracle.query(visited[i])?;
        for j in (i + 1)..k {
            if let Some(label) = view.edge_to(visited[j]) {
                edges.push((i as u8, j as u8, label));
            }
        }
    }
    Ok(Cis::from_parts(visited, edges))
}

struct ChainState {
    cur: Cis,
    frontier: Frontier,
    neighbors: NeighborSet,
}

fn chain_init(
    oracle: &mut QueryOracle<'_>,
    k: usize,
    cfg: &WalkConfig,
    rng: &mut impl Rng,
) -> Result<ChainState> {
    let cur = seed_cis(oracle, k, cfg.start, rng)?;
    let f = frontier(oracle, &cur)?;
    let neighbors = neighbor_cises(&cur, &f);
    Ok(ChainState {
        cur,
        frontier: f,
        neighbors,
    })
}

fn budget_stop<T>(res: Result<T>) -> Result<Option<T>> {
    match res {
        Ok(v) => Ok(Some(v)),
        Err(Error::BudgetExhausted) => Ok(None),
        Err(e) => Err(e),
    }
}

fn validate_walk(
    oracle: &QueryOracle<'_>,
    walk_k: usize,
    registry_k: usize,
    target_k: usize,
) -> Result<()> {
    if walk_k < 2 {
        return Err(Error::InvalidConfig(
            "walk dimension must be at least 2".into(),
        ));
    }
    if target_k > crate::cis::MAX_K {
        return Err(Error::SizeUnsupported {
            size: target_k,
            max: crate::cis::MAX_K,
        });
    }
    if registry_k != target_k {
        return Err(Error::InvalidConfig(format!(
            "registry is for k={registry_k}, walk targets k={target_k}"
        )));
    }
    let n = oracle.graph().node_count();
    if walk_k >= n {
        return Err(Error::GraphTooSmall {
            need: walk_k + 1,
            have: n,
        });
    }
    Ok(())
}

/// Plain random walk on the k-node relationship graph: from the current
/// subgraph, move to a uniformly chosen neighbor. Stationary mass of a
/// subgraph is proportional to its degree, which each sample records.
pub fn run_srw(
    oracle: &mut QueryOracle<'_>,
    registry: &ClassRegistry,
    cfg: &WalkConfig,
) -> Result<WalkTrace> {
    validate_walk(oracle, cfg.k, registry.k(), cfg.k)?;
    let mut rng = cfg.rng();
    let mut samples = Vec::new();
    let mut truncated = false;
    if let Some(mut st) = budget_stop(chain_init(oracle, cfg.k, cfg, &mut rng))? {
        for step in 0..cfg.steps {
            if budget_stop(oracle.charge_step())?.is_none() {
                truncated = true;
                break;
            }
            let d = st.neighbors.degree();
            debug_assert!(d >= 1);
            if step >= cfg.burn_in {
                samples.push(WalkSample {
                    key: st.cur.key(),
                    class_id: registry.classify(&st.cur)?,
                    degree: d as u64,
                });
            }
            if cfg.lazy && rng.random::<f64>() < 0.5 {
                continue;
            }
            let next = st.neighbors.neighbors[rng.random_range(0..d)].clone();
            match budget_stop(frontier(oracle, &next))? {
                Some(f) => {
                    let neighbors = neighbor_cises(&next, &f);
                    st = ChainState {
                        cur: next,
                        frontier: f,
                        neighbors,
                    };
                }
                None => {
                    truncated = true;
                    break;
                }
            }
        }
    } else {
        truncated = true;
    }
    Ok(WalkTrace {
        method: WalkMethod::Srw,
        k: cfg.k,
        samples,
        truncated,
        stats: oracle.stats(),
    })
}

/// Pairwise walk: run the plain walk one size down and emit the union of
/// each consecutive state pair, which always has exactly k nodes. Each
/// union records how many (k-1)-node subgraphs it contains.
pub fn run_psrw(
    oracle: &mut QueryOracle<'_>,
    registry: &ClassRegistry,
    cfg: &WalkConfig,
) -> Result<PairTrace> {
    if cfg.k < 3 {
        return Err(Error::InvalidConfig("pairwise walk needs k >= 3".into()));
    }
    let dim = cfg.k - 1;
    validate_walk(oracle, dim, registry.k(), cfg.k)?;
    let mut rng = cfg.rng();
    let mut samples = Vec::new();
    let mut truncated = false;
    if let Some(mut st) = budget_stop(chain_init(oracle, dim, cfg, &mut rng))? {
        let pair_steps = cfg.steps.saturating_sub(1);
        for step in 0..pair_steps {
            if budget_stop(oracle.charge_step())?.is_none() {
                truncated = true;
                break;
            }
            if cfg.lazy && rng.random::<f64>() < 0.5 {
                continue;
            }
            let d = st.neighbors.degree();
            let idx = rng.random_range(0..d);
            let (_, entry_idx) = st.neighbors.origins[idx];
            let entry = &st.frontier.entries[entry_idx as usize];
            let union = extend_with(&st.cur, entry.node, &entry.links);
            debug_assert_eq!(union.k(), cfg.k);
            if step >= cfg.burn_in {
                let i_count = count_contained(&union);
                debug_assert!(i_count >= 2);
                samples.push(PairSample {
                    key: union.key(),
                    class_id: registry.classify(&union)?,
                    i_count,
                });
            }
            let next = st.neighbors.neighbors[idx].clone();
            match budget_stop(frontier(oracle, &next))? {
                Some(f) => {
                    let neighbors = neighbor_cises(&next, &f);
                    st = ChainState {
                        cur: next,
                        frontier: f,
                        neighbors,
                    };
                }
                None => {
                    truncated = true;
                    break;
                }
            }
        }
    } else {
        truncated = true;
    }
    Ok(PairTrace {
        k: cfg.k,
        samples,
        truncated,
        stats: oracle.stats(),
    })
}

/// Mixed-size sampling: one walk at size k feeds three estimators at
/// sizes k-1, k, and k+1. The size-k view is the plain walk sample, the
/// size-(k+1) view is the consecutive-pair union, and the size-(k-1) view
/// records every contained subgraph together with its containing count
/// (free of budget: containment lookups reuse already-queried nodes).
pub fn run_mss(
    oracle: &mut QueryOracle<'_>,
    lower: &ClassRegistry,
    mid: &ClassRegistry,
    upper: &ClassRegistry,
    cfg: &WalkConfig,
) -> Result<MssTraces> {
    if cfg.k < 3 {
        return Err(Error::InvalidConfig("mixed-size walk needs k >= 3".into()));
    }
    validate_walk(oracle, cfg.k, mid.k(), cfg.k)?;
    if lower.k() != cfg.k - 1 || upper.k() != cfg.k + 1 {
        return Err(Error::InvalidConfig(
            "mss registries must cover k-1, k, k+1".into(),
        ));
    }
    if cfg.k + 1 > crate::cis::MAX_K {
        return Err(Error::SizeUnsupported {
            size: cfg.k + 1,
            max: crate::cis::MAX_K,
        });
    }
    let mut rng = cfg.rng();
    let mut node_samples = Vec::new();
    let mut pair_samples = Vec::new();
    let mut reduce_samples = Vec::new();
    let mut truncated = false;
    if let Some(mut st) = budget_stop(chain_init(oracle, cfg.k, cfg, &mut rng))? {
        // the previous state plus the frontier node that extended it
        let mut prev: Option<PendingUnion> = None;
        for step in 0..cfg.steps {
            if budget_stop(oracle.charge_step())?.is_none() {
                truncated = true;
                break;
            }
            let d = st.neighbors.degree() as u64;
            if step >= cfg.burn_in {
                node_samples.push(WalkSample {
                    key: st.cur.key(),
                    class_id: mid.classify(&st.cur)?,
                    degree: d,
                });
                let mut entries = Vec::new();
                for sub in contained_cises(&st.cur) {
                    let containing = containing_count(oracle, &sub)?;
                    entries.push(ReduceEntry {
                        class_id: lower.classify(&sub)?,
                        containing,
                    });
                }
                reduce_samples.push(ReduceSample { degree: d, entries });
            }
            if let Some((prev_cis, u, links)) = prev.take() {
                let union = extend_with(&prev_cis, u, &links);
                debug_assert_eq!(union.k(), cfg.k + 1);
                // pair p covers states (p, p+1) and lands at step p+1
                if step > cfg.burn_in {
                    let i_count = count_contained(&union);
                    pair_samples.push(PairSample {
                        key: union.key(),
                        class_id: upper.classify(&union)?,
                        i_count,
                    });
                }
            }
            if cfg.lazy && rng.random::<f64>() < 0.5 {
                continue;
            }
            let idx = rng.random_range(0..st.neighbors.degree());
            let (_, entry_idx) = st.neighbors.origins[idx];
            let entry = &st.frontier.entries[entry_idx as usize];
            prev = Some((st.cur.clone(), entry.node, entry.links.clone()));
            let next = st.neighbors.neighbors[idx].clone();
            match budget_stop(frontier(oracle, &next))? {
                Some(f) => {
                    let neighbors = neighbor_cises(&next, &f);
                    st = ChainState {
                        cur: next,
                        frontier: f,
                        neighbors,
                    };
                }
                None => {
                    truncated = true;
                    break;
                }
            }
        }
    } else {
        truncated = true;
    }
    let stats = oracle.stats();
    Ok(MssTraces {
        node: WalkTrace {
            method: WalkMethod::Mss,
            k: cfg.k,
            samples: node_samples,
            truncated,
            stats,
        },
        pair: PairTrace {
            k: cfg.k + 1,
            samples: pair_samples,
            truncated,
            stats,
        },
        reduce: ReduceTrace {
            k: cfg.k - 1,
            samples: reduce_samples,
            truncated,
            stats,
        },
    })
}

/// Metropolis-Hastings walk targeting the uniform distribution over
/// k-node subgraphs: propose a uniform neighbor y and accept with
/// probability min{1, d(x)/d(y)}; on rejection the current state is
/// recorded again. Rejected proposals still pay their queries.
pub fn run_mhsrw(
    oracle: &mut QueryOracle<'_>,
    registry: &ClassRegistry,
    cfg: &WalkConfig,
) -> Result<WalkTrace> {
    validate_walk(oracle, cfg.k, registry.k(), cfg.k)?;
    let mut rng = cfg.rng();
    let mut samples = Vec::new();
    let mut truncated = false;
    if let Some(mut st) = budget_stop(chain_init(oracle, cfg.k, cfg, &mut rng))? {
        for step in 0..cfg.steps {
            if budget_stop(oracle.charge_step())?.is_none() {
                truncated = true;
                break;
            }
            let d = st.neighbors.degree();
            if step >= cfg.burn_in {
                samples.push(WalkSample {
                    key: st.cur.key(),
                    class_id: registry.classify(&st.cur)?,
                    degree: d as u64,
                });
            }
            let idx = rng.random_range(0..d);
            let proposal = st.neighbors.neighbors[idx].clone();
            let pf = match budget_stop(frontier(oracle, &proposal))? {
                Some(f) => f,
                None => {
                    truncated = true;
                    break;
                }
            };
            let pneighbors = neighbor_cises(&proposal, &pf);
            let accept = (d as f64 / pneighbors.degree() as f64).min(1.0);
            if rng.random::<f64>() < accept {
                st = ChainState {
                    cur: proposal,
                    frontier: pf,
                    neighbors: pneighbors,
                };
            }
        }
    } else {
        truncated = true;
    }
    Ok(WalkTrace {
        method: WalkMethod::Mhsrw,
        k: cfg.k,
        samples,
        truncated,
        stats: oracle.stats(),
    })
}

/// Neighbors of a subgraph in the mixed 3/4/5 graph: contained subgraphs
/// one size down (for sizes 4 and 5), same-size relationship neighbors,
/// and one-node extensions (for sizes 3 and 4).
pub fn mix_neighbors(oracle: &mut QueryOracle<'_>, s: &Cis) -> Result<Vec<Cis>> {
    let k = s.k();
    debug_assert!((3..=5).contains(&k));
    let f = frontier(oracle, s)?;
    let mut out = Vec::new();
    if k >= 4 {
        out.extend(contained_cises(s));
    }
    out.extend(neighbor_cises(s, &f).neighbors);
    if k <= 4 {
        for entry in &f.entries {
            out.push(extend_with(s, entry.node, &entry.links));
        }
    }
    Ok(out)
}

/// Metropolis-Hastings walk over the mixed 3/4/5-node subgraph graph,
/// recording per-size class observations.
pub fn run_guise(
    oracle: &mut QueryOracle<'_>,
    regs: &GuiseRegistries<'_>,
    cfg: &WalkConfig,
) -> Result<GuiseTrace> {
    let n = oracle.graph().node_count();
    if n < 6 {
        return Err(Error::GraphTooSmall { need: 6, have: n });
    }
    let mut rng = cfg.rng();
    let mut samples = Vec::new();
    let mut truncated = false;
    let init = (|| -> Result<(Cis, Vec<Cis>)> {
        let cur = seed_cis(oracle, 3, cfg.start, &mut rng)?;
        let neighbors = mix_neighbors(oracle, &cur)?;
        Ok((cur, neighbors))
    })();
    if let Some((mut cur, mut neighbors)) = budget_stop(init)? {
        for step in 0..cfg.steps {
            if budget_stop(oracle.charge_step())?.is_none() {
                truncated = true;
                break;
            }
            let d = neighbors.len();
            if step >= cfg.burn_in {
                samples.push(GuiseSample {
                    key: cur.key(),
                    size: cur.k() as u8,
                    class_id: regs.for_size(cur.k()).classify(&cur)?,
                    degree: d as u64,
                });
            }
            let idx = rng.random_range(0..d);
            let proposal = neighbors[idx].clone();
            let pneighbors = match budget_stop(mix_neighbors(oracle, &proposal))? {
                Some(v) => v,
                None => {
                    truncated = true;
                    break;
                }
            };
            let accept = (d as f64 / pneighbors.len() as f64).min(1.0);
            if rng.random::<f64>() < accept {
                cur = proposal;
                neighbors = pneighbors;
            }
        }
    } else {
        truncated = true;
    }
    Ok(GuiseTrace {
        samples,
        truncated,
        stats: oracle.stats(),
    })
}
