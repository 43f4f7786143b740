//! Degree-preserving random graphs and significance scores.
//!
//! The null pipeline estimates the joint in/out-degree distribution by a
//! plain node walk, draws degree sequences from it, wires stub-matching
//! random graphs that preserve the sequence exactly (rejecting self-loops
//! and parallel edges, with a bounded retry-then-restart scheme), and
//! scores observed class concentrations against the null mean and
//! standard deviation.

use std::collections::{BTreeMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::canon::{CanonicalCode, ClassId, ClassRegistry};
use crate::estimate::{ht_edge_estimate, ConcentrationVector};
use crate::exact::{exact_class_counts, exact_class_counts_capped};
use crate::graph::{Direction, EdgeLabel, GraphMode, LabeledGraph, NodeId};
use crate::oracle::QueryOracle;
use crate::par;
use crate::walk::{run_psrw, WalkConfig};
use crate::{Error, Result};

/// Fraction of nodes per (in-degree, out-degree) cell. Undirected graphs
/// live on the diagonal (d, d).
#[derive(Debug, Clone)]
pub struct JointDegreeDistribution {
    pub mass: BTreeMap<(u32, u32), f64>,
    pub node_count_estimate: u64,
    pub truncated: bool,
}

impl JointDegreeDistribution {
    pub fn total_mass(&self) -> f64 {
        self.mass.values().sum()
    }

    pub fn l1_distance(&self, other: &JointDegreeDistribution) -> f64 {
        let mut keys: HashSet<(u32, u32)> = self.mass.keys().copied().collect();
        keys.extend(other.mass.keys().copied());
        keys.into_iter()
            .map(|k| {
                (self.mass.get(&k).copied().unwrap_or(0.0)
                    - other.mass.get(&k).copied().unwrap_or(0.0))
                .abs()
            })
            .sum()
    }

    pub fn is_diagonal(&self) -> bool {
        self.mass.keys().all(|&(i, o)| i == o)
    }
}

/// (in, out) degrees of one node from its incident labels. Undirected and
/// signed edges count toward both sides.
pub fn node_in_out(incident: &[(NodeId, EdgeLabel)]) -> (u32, u32) {
    let mut inc = 0;
    let mut out = 0;
    for &(_, label) in incident {
        match label.direction {
            Direction::Forward => out += 1,
            Direction::Backward => inc += 1,
            Direction::Both | Direction::None => {
                inc += 1;
                out += 1;
            }
        }
    }
    (inc, out)
}

/// Ground-truth joint degree distribution by direct counting.
pub fn exact_joint_degree_dist(g: &LabeledGraph) -> JointDegreeDistribution {
    let n = g.node_count();
    let mut mass: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    for v in 0..n as NodeId {
        let key = node_in_out(g.neighbors(v).unwrap());
        *mass.entry(key).or_insert(0.0) += 1.0 / n as f64;
    }
    JointDegreeDistribution {
        mass,
        node_count_estimate: n as u64,
        truncated: false,
    }
}

/// Estimate the joint degree distribution with a plain node walk,
/// reweighting each visit by the inverse skeleton degree (the walk's
/// stationary mass is proportional to degree). Self-normalized; budget
/// exhaustion returns the estimate from the samples so far, flagged.
pub fn estimate_joint_degree_dist(
    oracle: &mut QueryOracle<'_>,
    steps: u64,
    seed: u64,
) -> Result<JointDegreeDistribution> {
    let n = oracle.graph().node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cur: NodeId = rng.random_range(0..n as NodeId);
    let mut raw: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    let mut norm = 0.0;
    let mut truncated = false;
    for _ in 0..steps {
        let view = match oracle.query(cur) {
            Ok(v) => v,
            Err(Error::BudgetExhausted) => {
                truncated = true;
                break;
            }
            Err(e) => return Err(e),
        };
        let deg = view.incident.len();
        if deg == 0 {
            return Err(Error::InvalidConfig("walk reached an isolated node".into()));
        }
        let w = 1.0 / deg as f64;
        *raw.entry(node_in_out(view.incident)).or_insert(0.0) += w;
        norm += w;
        cur = view.incident[rng.random_range(0..deg)].0;
    }
    if norm == 0.0 {
        return Err(Error::EmptyTrace);
    }
    let mass = raw.into_iter().map(|(k, v)| (k, v / norm)).collect();
    Ok(JointDegreeDistribution {
        mass,
        node_count_estimate: n as u64,
        truncated,
    })
}

/// Target degrees for a generated graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DegreeSequence {
    Undirected(Vec<u32>),
    Directed(Vec<(u32, u32)>),
}

impl DegreeSequence {
    pub fn len(&self) -> usize {
        match self {
            DegreeSequence::Undirected(v) => v.len(),
            DegreeSequence::Directed(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_balanced(&self) -> bool {
        match self {
            DegreeSequence::Undirected(v) => v.iter().map(|&d| d as u64).sum::<u64>() % 2 == 0,
            DegreeSequence::Directed(v) => {
                v.iter().map(|&(i, _)| i as u64).sum::<u64>()
                    == v.iter().map(|&(_, o)| o as u64).sum::<u64>()
            }
        }
    }
}

/// Observed degree sequence of a graph, directed when its mode is.
pub fn degree_sequence_of(g: &LabeledGraph) -> DegreeSequence {
    let n = g.node_count();
    if g.mode() == GraphMode::Directed {
        DegreeSequence::Directed(
            (0..n as NodeId)
                .map(|v| node_in_out(g.neighbors(v).unwrap()))
                .collect(),
        )
    } else {
        DegreeSequence::Undirected(
            (0..n as NodeId)
                .map(|v| g.degree(v).unwrap() as u32)
                .collect(),
        )
    }
}

/// Draw an n-node degree sequence i.i.d. from the joint distribution,
/// resampling the last node until the stub totals balance.
pub fn sample_degree_sequence(
    jdd: &JointDegreeDistribution,
    n: usize,
    rng: &mut impl Rng,
) -> Result<DegreeSequence> {
    if jdd.mass.is_empty() || n == 0 {
        return Err(Error::InvalidConfig(
            "empty degree distribution or n = 0".into(),
        ));
    }
    let cells: Vec<((u32, u32), f64)> = jdd.mass.iter().map(|(&k, &v)| (k, v)).collect();
    let total: f64 = cells.iter().map(|&(_, w)| w).sum();
    let diagonal = jdd.is_diagonal();
    for _attempt in 0..1_000 {
        let mut pairs: Vec<(u32, u32)> = (0..n).map(|_| draw_cell(&cells, total, rng)).collect();
        let mut balanced = false;
        for _ in 0..10_000 {
            let seq_ok = if diagonal {
                pairs.iter().map(|&(i, _)| i as u64).sum::<u64>() % 2 == 0
            } else {
                pairs.iter().map(|&(i, _)| i as u64).sum::<u64>()
                    == pairs.iter().map(|&(_, o)| o as u64).sum::<u64>()
            };
            if seq_ok {
                balanced = true;
                break;
            }
            pairs[n - 1] = draw_cell(&cells, total, rng);
        }
        if balanced {
            return Ok(if diagonal {
                DegreeSequence::Undirected(pairs.into_iter().map(|(i, _)| i).collect())
            } else {
                DegreeSequence::Directed(pairs)
            });
        }
    }
    Err(Error::InvalidConfig(
        "could not balance sampled degree sequence".into(),
    ))
}

fn draw_cell(cells: &[((u32, u32), f64)], total: f64, rng: &mut impl Rng) -> (u32, u32) {
    let mut x: f64 = rng.random_range(0.0..total);
    for &(cell, w) in cells {
        if x < w {
            return cell;
        }
        x -= w;
    }
    cells[cells.len() - 1].0
}

const PER_EDGE_RETRIES: u32 = 100;
const MAX_RESTARTS: u32 = 50;

/// Wire a simple random graph with exactly the given degrees by matching
/// edge stubs: draw an in-stub, then draw out-stubs until one avoids a
/// self-loop or duplicate edge. A stuck draw (100 retries) restarts the
/// wiring from scratch, up to 50 restarts.
pub fn generate_configuration_graph(
    seq: &DegreeSequence,
    rng: &mut impl Rng,
) -> Result<LabeledGraph> {
    if !seq.is_balanced() {
        return Err(Error::InvalidConfig(
            "degree sequence does not balance".into(),
        ));
    }
    for _restart in 0..MAX_RESTARTS {
        match try_wire(seq, rng) {
            Some(g) => return g,
            None => continue,
        }
    }
    Err(Error::WiringFailed(MAX_RESTARTS))
}

fn try_wire(seq: &DegreeSequence, rng: &mut impl Rng) -> Option<Result<LabeledGraph>> {
    match seq {
        DegreeSequence::Directed(pairs) => {
            let n = pairs.len();
            let mut in_stubs: Vec<u32> = Vec::new();
            let mut out_stubs: Vec<u32> = Vec::new();
            for (v, &(i, o)) in pairs.iter().enumerate() {
                in_stubs.extend(std::iter::repeat_n(v as u32, i as usize));
                out_stubs.extend(std::iter::repeat_n(v as u32, o as usize));
            }
            let mut edges: HashSet<(u32, u32)> = HashSet::with_capacity(in_stubs.len());
            while !in_stubs.is_empty() {
                let ii = rng.random_range(0..in_stubs.len());
                let v_in = in_stubs[ii];
                let mut placed = None;
                for _ in 0..PER_EDGE_RETRIES {
                    let oi = rng.random_range(0..out_stubs.len());
                    let v_out = out_stubs[oi];
                    if v_out == v_in || edges.contains(&(v_out, v_in)) {
                        continue;
                    }
                    placed = Some(oi);
                    break;
                }
                let oi = placed?;
                edges.insert((out_stubs[oi], v_in));
                in_stubs.swap_remove(ii);
                out_stubs.swap_remove(oi);
            }
            let mut list: Vec<(u32, u32)> = edges.into_iter().collect();
            list.sort_unstable();
            Some(LabeledGraph::from_edges(
                GraphMode::Directed,
                n,
                list.into_iter()
                    .map(|(u, v)| (u, v, EdgeLabel::directed(Direction::Forward))),
            ))
        }
        DegreeSequence::Undirected(degrees) => {
            let n = degrees.len();
            let mut stubs: Vec<u32> = Vec::new();
            for (v, &d) in degrees.iter().enumerate() {
                stubs.extend(std::iter::repeat_n(v as u32, d as usize));
            }
            let mut edges: HashSet<(u32, u32)> = HashSet::with_capacity(stubs.len() / 2);
            while !stubs.is_empty() {
                let ai = rng.random_range(0..stubs.len());
                let a = stubs[ai];
                let mut placed = None;
                for _ in 0..PER_EDGE_RETRIES {
                    let bi = rng.random_range(0..stubs.len());
                    if bi == ai {
                        continue;
                    }
                    let b = stubs[bi];
                    if a == b || edges.contains(&(a.min(b), a.max(b))) {
                        continue;
                    }
                    placed = Some(bi);
                    break;
                }
                let bi = placed?;
                let b = stubs[bi];
                edges.insert((a.min(b), a.max(b)));
                // remove the higher index first so the lower stays valid
                let (hi, lo) = if ai > bi { (ai, bi) } else { (bi, ai) };
                stubs.swap_remove(hi);
                stubs.swap_remove(lo);
            }
            let mut list: Vec<(u32, u32)> = edges.into_iter().collect();
            list.sort_unstable();
            Some(LabeledGraph::from_edges(
                GraphMode::Undirected,
                n,
                list.into_iter().map(|(u, v)| (u, v, EdgeLabel::PLAIN)),
            ))
        }
    }
}

/// Where null-model degree sequences come from.
pub enum NullSource {
    /// One fixed sequence used for every generated graph.
    Sequence(DegreeSequence),
    /// Draw a fresh sequence of the given node count per graph.
    Joint(JointDegreeDistribution, usize),
}

#[derive(Debug, Clone, Copy)]
pub struct NullOptions {
    /// Use exact enumeration when the subgraph count stays below this cap.
    pub exact_cap: u64,
    /// Walk steps for the sampled fallback.
    pub psrw_steps: u64,
}

impl Default for NullOptions {
    fn default() -> Self {
        NullOptions {
            exact_cap: 3_000_000,
            psrw_steps: 20_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ZRow {
    pub class_id: ClassId,
    pub code: CanonicalCode,
    pub omega: f64,
    pub mu: f64,
    pub sigma: f64,
    /// None when sigma is zero.
    pub z: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ZScoreReport {
    pub k: usize,
    pub mode: GraphMode,
    pub n_random: usize,
    /// "exact" or "psrw", chosen once per report by the enumeration cap.
    pub null_method: String,
    pub rows: Vec<ZRow>,
}

/// Score observed concentrations against degree-preserving random graphs:
/// generate `n_random` graphs, compute each one's concentrations (exact
/// when the enumeration cap admits it, sampled otherwise), and report
/// per-class (omega - mu) / sigma.
pub fn z_scores(
    est: &ConcentrationVector,
    source: &NullSource,
    n_random: usize,
    registry: &ClassRegistry,
    seed: u64,
    opts: NullOptions,
) -> Result<ZScoreReport> {
    if n_random < 2 {
        return Err(Error::InvalidConfig("need at least 2 null graphs".into()));
    }
    let k = registry.k();
    let make_graph = |idx: usize| -> Result<LabeledGraph> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(0x5eed_0000 + idx as u64);
        let seq = match source {
            NullSource::Sequence(seq) => seq.clone(),
            NullSource::Joint(jdd, n) => sample_degree_sequence(jdd, *n, &mut rng)?,
        };
        generate_configuration_graph(&seq, &mut rng)
    };
    // decide the method once, from the first graph
    let probe = make_graph(0)?;
    let use_exact = exact_class_counts_capped(&probe, k, registry, opts.exact_cap)?.is_some();
    let vectors: Vec<Result<ConcentrationVector>> = par::map_indexed(n_random, |idx| {
        let g = make_graph(idx)?;
        if use_exact {
            let counts = exact_class_counts(&g, k, registry)?;
            Ok(ConcentrationVector::from_counts(&counts, registry))
        } else {
            let lcc = g.largest_connected_component();
            let mut oracle = QueryOracle::unlimited(&lcc);
            let cfg = WalkConfig {
                stream: idx as u64,
                ..WalkConfig::new(k, opts.psrw_steps, seed ^ 0x9e3779b97f4a7c15)
            };
            let trace = run_psrw(&mut oracle, registry, &cfg)?;
            ht_edge_estimate(&trace, registry)
        }
    });
    let vectors: Vec<ConcentrationVector> = vectors.into_iter().collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for share in &est.shares {
        // match null vectors by canonical code so the report does not
        // depend on id assignment order in dynamic registries
        let values: Vec<f64> = vectors
            .iter()
            .map(|v| {
                v.shares
                    .iter()
                    .find(|s| s.code == share.code)
                    .map(|s| s.value)
                    .unwrap_or(0.0)
            })
            .collect();
        let mu = values.iter().sum::<f64>() / values.len() as f64;
        let var =
            values.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / (values.len() - 1) as f64;
        let sigma = var.sqrt();
        let z = if sigma > 0.0 {
            Some((share.value - mu) / sigma)
        } else {
            None
        };
        rows.push(ZRow {
            class_id: share.class_id,
            code: share.code.clone(),
            omega: share.value,
            mu,
            sigma,
            z,
        });
    }
    Ok(ZScoreReport {
        k,
        mode: registry.mode(),
        n_random,
        null_method: if use_exact {
            "exact".into()
        } else {
            "psrw".into()
        },
        rows,
    })
}
