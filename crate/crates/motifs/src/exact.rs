//! Exact ground truth: enumeration of all k-node connected induced
//! subgraphs by rooted extension with exclusive neighborhoods, exact
//! concentrations, explicit relationship graphs for small inputs, and a
//! probabilistic-pruning sampler with per-sample inclusion probabilities.

use std::collections::HashMap;

use rand::Rng;

use crate::canon::{CanonicalCode, ClassId, ClassRegistry};
use crate::cis::{induced_cis, Cis, CisKey};
use crate::estimate::ConcentrationVector;
use crate::graph::{LabeledGraph, NodeId};
use crate::oracle::QueryOracle;
use crate::par;
use crate::{Error, Result};

/// Default cap on materializing subgraphs as explicit relationship-graph
/// nodes.
pub const RELATIONSHIP_GUARD: u64 = 100_000;

struct Scratch {
    marked: Vec<bool>,
    sub: Vec<NodeId>,
    ext: Vec<Vec<NodeId>>,
    emit: Vec<NodeId>,
}

impl Scratch {
    fn new(n: usize, k: usize) -> Scratch {
        Scratch {
            marked: vec![false; n],
            sub: Vec::with_capacity(k),
            ext: vec![Vec::new(); k + 1],
            emit: Vec::with_capacity(k),
        }
    }
}

/// Enumerate every k-node connected induced subgraph rooted at `root`,
/// extending only through nodes with larger ids and exclusive
/// neighborhoods, so each subgraph is emitted exactly once across roots.
/// Returns false if the visitor cancelled.
fn esu_from_root(
    g: &LabeledGraph,
    k: usize,
    root: NodeId,
    s: &mut Scratch,
    f: &mut impl FnMut(&[NodeId]) -> bool,
) -> bool {
    s.sub.clear();
    s.sub.push(root);
    if k == 1 {
        return f(&[root]);
    }
    s.marked[root as usize] = true;
    let mut undo = vec![root];
    s.ext[1].clear();
    for &(u, _) in g.neighbors(root).unwrap() {
        s.marked[u as usize] = true;
        undo.push(u);
        if u > root {
            s.ext[1].push(u);
        }
    }
    let ok = esu_extend(g, k, root, 1, s, f);
    for v in undo {
        s.marked[v as usize] = false;
    }
    ok
}

fn esu_extend(
    g: &LabeledGraph,
    k: usize,
    root: NodeId,
    depth: usize,
    s: &mut Scratch,
    f: &mut impl FnMut(&[NodeId]) -> bool,
) -> bool {
    while let Some(w) = s.ext[depth].pop() {
        s.sub.push(w);
        if depth + 1 == k {
            s.emit.clear();
            s.emit.extend_from_slice(&s.sub);
            s.emit.sort_unstable();
            if !f(&s.emit) {
                s.sub.pop();
                return false;
            }
            s.sub.pop();
            continue;
        }
        let (left, right) = s.ext.split_at_mut(depth + 1);
        let next = &mut right[0];
        next.clear();
        next.extend_from_slice(&left[depth]);
        let mut undo = Vec::new();
        for &(u, _) in g.neighbors(w).unwrap() {
            if u > root && !s.marked[u as usize] {
                s.marked[u as usize] = true;
                undo.push(u);
                next.push(u);
            }
        }
        let ok = esu_extend(g, k, root, depth + 1, s, f);
        s.sub.pop();
        for v in undo {
            s.marked[v as usize] = false;
        }
        if !ok {
            return false;
        }
    }
    true
}

/// Visit every k-node connected induced subgraph exactly once as a sorted
/// node-set slice, in deterministic order. The visitor returns false to
/// cancel the enumeration.
pub fn for_each_cis(g: &LabeledGraph, k: usize, mut f: impl FnMut(&[NodeId]) -> bool) {
    let n = g.node_count();
    if k == 0 || k > n {
        return;
    }
    let mut scratch = Scratch::new(n, k);
    for root in 0..n as NodeId {
        if !esu_from_root(g, k, root, &mut scratch, &mut f) {
            return;
        }
    }
}

/// Materialize every k-node subgraph with its induced edges. Intended for
/// small graphs; large runs should use the counting entry points.
pub fn enumerate_cises(g: &LabeledGraph, k: usize) -> Vec<Cis> {
    let mut out = Vec::new();
    for_each_cis(g, k, |nodes| {
        out.push(induced_cis(g, nodes).expect("enumerated nodes are valid"));
        true
    });
    out
}

pub fn count_cises(g: &LabeledGraph, k: usize) -> u64 {
    let n = g.node_count();
    par::fold_merge(
        n,
        || 0u64,
        |acc, root| {
            let mut scratch = Scratch::new(n, k);
            let mut c = 0u64;
            esu_from_root(g, k, root as NodeId, &mut scratch, &mut |_| {
                c += 1;
                true
            });
            acc + c
        },
        |a, b| a + b,
    )
}

/// Exact per-class counts of all k-node subgraphs.
#[derive(Debug, Clone)]
pub struct ClassCounts {
    pub k: usize,
    pub total: u64,
    /// (class id, count), ascending by id over the registry snapshot.
    pub counts: Vec<(ClassId, u64)>,
}

/// Count every k-node subgraph per class, sharded by root across workers.
/// Built-in registries classify through their mask tables without
/// materializing subgraphs; dynamic registries merge by canonical code,
/// with ids assigned in (edge count, code) order afterwards, so the result
/// never depends on worker scheduling.
pub fn exact_class_counts(
    g: &LabeledGraph,
    k: usize,
    registry: &ClassRegistry,
) -> Result<ClassCounts> {
    if registry.k() != k {
        return Err(Error::InvalidConfig("registry k mismatch".into()));
    }
    let n = g.node_count();
    let mode = registry.mode();
    if registry.has_mask_table() {
        let slots = registry.class_count() + 1;
        let (by_id, _) = par::fold_merge(
            n,
            || (vec![0u64; slots], Scratch::new(n, k)),
            |(mut acc, mut scratch), root| {
                esu_from_root(g, k, root as NodeId, &mut scratch, &mut |nodes| {
                    let mask = crate::canon::edge_mask_of_nodes(g, nodes, mode)
                        .expect("mask fits whenever a table exists");
                    let id = registry
                        .classify_mask(mask)
                        .expect("enumerated sets are connected");
                    acc[id as usize] += 1;
                    true
                });
                (acc, scratch)
            },
            |(mut a, scratch), (b, _)| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                (a, scratch)
            },
        );
        let counts: Vec<(ClassId, u64)> = by_id
            .into_iter()
            .enumerate()
            .skip(1)
            .filter(|&(_, c)| c > 0)
            .map(|(id, c)| (id as ClassId, c))
            .collect();
        let total = counts.iter().map(|&(_, c)| c).sum();
        return Ok(ClassCounts { k, total, counts });
    }
    let (by_code, _) = par::fold_merge(
        n,
        || (HashMap::<CanonicalCode, u64>::new(), Scratch::new(n, k)),
        |(mut acc, mut scratch), root| {
            esu_from_root(g, k, root as NodeId, &mut scratch, &mut |nodes| {
                let cis = induced_cis(g, nodes).expect("valid nodes");
                let code = crate::canon::canonical_code(&cis, mode).expect("k within bounds");
                *acc.entry(code).or_insert(0) += 1;
                true
            });
            (acc, scratch)
        },
        |(mut a, scratch), (b, _)| {
            for (code, c) in b {
                *a.entry(code).or_insert(0) += c;
            }
            (a, scratch)
        },
    );
    let mut codes: Vec<(CanonicalCode, u64)> = by_code.into_iter().collect();
    codes.sort_by(|a, b| (a.0.edge_count(), &a.0).cmp(&(b.0.edge_count(), &b.0)));
    let mut counts: HashMap<ClassId, u64> = HashMap::new();
    let mut total = 0u64;
    for (code, c) in codes {
        let id = registry.class_for_code(code)?;
        *counts.entry(id).or_insert(0) += c;
        total += c;
    }
    let mut counts: Vec<(ClassId, u64)> = counts.into_iter().collect();
    counts.sort_unstable();
    Ok(ClassCounts { k, total, counts })
}

/// Sequential counting with an early abort once `cap` subgraphs are seen.
/// Returns Ok(None) when the cap is exceeded.
pub fn exact_class_counts_capped(
    g: &LabeledGraph,
    k: usize,
    registry: &ClassRegistry,
    cap: u64,
) -> Result<Option<ClassCounts>> {
    let mut by_code: HashMap<CanonicalCode, u64> = HashMap::new();
    let mut total = 0u64;
    let mut overflow = false;
    let mode = registry.mode();
    for_each_cis(g, k, |nodes| {
        total += 1;
        if total > cap {
            overflow = true;
            return false;
        }
        let cis = induced_cis(g, nodes).expect("valid nodes");
        let code = crate::canon::canonical_code(&cis, mode).expect("k within bounds");
        *by_code.entry(code).or_insert(0) += 1;
        true
    });
    if overflow {
        return Ok(None);
    }
    let mut codes: Vec<(CanonicalCode, u64)> = by_code.into_iter().collect();
    codes.sort_by(|a, b| (a.0.edge_count(), &a.0).cmp(&(b.0.edge_count(), &b.0)));
    let mut counts: HashMap<ClassId, u64> = HashMap::new();
    for (code, c) in codes {
        let id = registry.class_for_code(code)?;
        *counts.entry(id).or_insert(0) += c;
    }
    let mut counts: Vec<(ClassId, u64)> = counts.into_iter().collect();
    counts.sort_unstable();
    Ok(Some(ClassCounts { k, total, counts }))
}

/// Exact concentration vector: classify every subgraph and normalize.
pub fn exact_concentrations(
    g: &LabeledGraph,
    k: usize,
    registry: &ClassRegistry,
) -> Result<ConcentrationVector> {
    let counts = exact_class_counts(g, k, registry)?;
    Ok(ConcentrationVector::from_counts(&counts, registry))
}

/// Explicit relationship graph over all k-node subgraphs: nodes are the
/// subgraphs, edges join pairs sharing exactly k-1 nodes.
pub struct RelationshipGraph {
    keys: Vec<CisKey>,
    index: HashMap<CisKey, u32>,
    adj: Vec<Vec<u32>>,
    edge_count: u64,
}

impl RelationshipGraph {
    pub fn node_count(&self) -> usize {
        self.keys.len()
    }

    pub fn edge_count(&self) -> u64 {
        self.edge_count
    }

    pub fn key(&self, i: usize) -> &CisKey {
        &self.keys[i]
    }

    pub fn keys(&self) -> &[CisKey] {
        &self.keys
    }

    pub fn index_of(&self, key: &CisKey) -> Option<usize> {
        self.index.get(key).map(|&i| i as usize)
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.adj[i]
    }

    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.adj.iter().enumerate().flat_map(|(i, row)| {
            row.iter()
                .filter(move |&&j| j as usize > i)
                .map(move |&j| (i as u32, j))
        })
    }

    pub fn is_connected(&self) -> bool {
        let n = self.keys.len();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut visited = 1;
        while let Some(v) = stack.pop() {
            for &w in &self.adj[v] {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    visited += 1;
                    stack.push(w as usize);
                }
            }
        }
        visited == n
    }

    /// Two-colorability of the whole graph (every component).
    pub fn is_bipartite(&self) -> bool {
        let n = self.keys.len();
        let mut color = vec![u8::MAX; n];
        for s in 0..n {
            if color[s] != u8::MAX {
                continue;
            }
            color[s] = 0;
            let mut stack = vec![s];
            while let Some(v) = stack.pop() {
                for &w in &self.adj[v] {
                    let w = w as usize;
                    if color[w] == u8::MAX {
                        color[w] = 1 - color[v];
                        stack.push(w);
                    } else if color[w] == color[v] {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Materialize the relationship graph, guarded against blowup.
pub fn build_relationship_graph(
    g: &LabeledGraph,
    k: usize,
    guard: u64,
) -> Result<RelationshipGraph> {
    let mut keys = Vec::new();
    let mut overflow = false;
    for_each_cis(g, k, |nodes| {
        if keys.len() as u64 >= guard {
            overflow = true;
            return false;
        }
        keys.push(CisKey::new(nodes));
        true
    });
    if overflow {
        return Err(Error::GuardExceeded {
            count: keys.len() as u64 + 1,
            guard,
        });
    }
    keys.sort_unstable();
    let index: HashMap<CisKey, u32> = keys
        .iter()
        .enumerate()
        .map(|(i, k)| (*k, i as u32))
        .collect();
    // bucket by (k-1)-subset: two subgraphs share exactly k-1 nodes iff
    // they cohabit exactly one bucket
    let mut buckets: HashMap<CisKey, Vec<u32>> = HashMap::new();
    for (i, key) in keys.iter().enumerate() {
        let nodes = key.nodes();
        for drop in 0..nodes.len() {
            let mut sub = Vec::with_capacity(nodes.len() - 1);
            for (j, &v) in nodes.iter().enumerate() {
                if j != drop {
                    sub.push(v);
                }
            }
            buckets.entry(CisKey::new(&sub)).or_default().push(i as u32);
        }
    }
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); keys.len()];
    let mut edge_count = 0u64;
    for members in buckets.into_values() {
        for a in 0..members.len() {
            for b in (a + 1)..members.len() {
                adj[members[a] as usize].push(members[b]);
                adj[members[b] as usize].push(members[a]);
                edge_count += 1;
            }
        }
    }
    for row in &mut adj {
        row.sort_unstable();
        debug_assert!(row.windows(2).all(|w| w[0] != w[1]));
    }
    Ok(RelationshipGraph {
        keys,
        index,
        adj,
        edge_count,
    })
}

/// Probabilistic-pruning enumeration: each extension at depth d survives
/// with probability `depth_probs[d-1]`, so every emitted subgraph carries
/// inclusion probability `prod(depth_probs)`. Queries are charged through
/// the oracle, one per distinct node whose neighbor list is read.
pub struct RandEsuOutcome {
    pub samples: Vec<(Cis, f64)>,
    pub inclusion_prob: f64,
    pub truncated: bool,
}

pub fn rand_esu(
    oracle: &mut QueryOracle<'_>,
    k: usize,
    depth_probs: &[f64],
    rng: &mut impl Rng,
) -> Result<RandEsuOutcome> {
    if depth_probs.len() != k {
        return Err(Error::InvalidConfig(format!(
            "need {k} depth probabilities, got {}",
            depth_probs.len()
        )));
    }
    if depth_probs.iter().any(|&p| !(p > 0.0 && p <= 1.0)) {
        return Err(Error::InvalidConfig(
            "depth probabilities must be in (0, 1]".into(),
        ));
    }
    let g = oracle.graph();
    let n = g.node_count();
    let inclusion_prob: f64 = depth_probs.iter().product();
    let mut roots: Vec<NodeId> = (0..n as NodeId).collect();
    // uniform-node-sampling flavor: visit roots in random order so budget
    // truncation is not biased toward low ids
    for i in (1..roots.len()).rev() {
        roots.swap(i, rng.random_range(0..=i));
    }
    let mut samples = Vec::new();
    let mut truncated = false;
    let mut scratch = Scratch::new(n, k);
    'roots: for root in roots {
        if rng.random::<f64>() >= depth_probs[0] {
            continue;
        }
        match rand_esu_root(
            oracle,
            k,
            root,
            depth_probs,
            rng,
            &mut scratch,
            &mut samples,
        ) {
            Ok(()) => {}
            Err(Error::BudgetExhausted) => {
                truncated = true;
                break 'roots;
            }
            Err(e) => return Err(e),
        }
    }
    let samples = samples
        .into_iter()
        .map(|nodes| (induced_cis(g, &nodes).expect("valid nodes"), inclusion_prob))
        .collect();
    Ok(RandEsuOutcome {
        samples,
        inclusion_prob,
        truncated,
    })
}

fn rand_esu_root(
    oracle: &mut QueryOracle<'_>,
    k: usize,
    root: NodeId,
    probs: &[f64],
    rng: &mut impl Rng,
    s: &mut Scratch,
    out: &mut Vec<Vec<NodeId>>,
) -> Result<()> {
    s.sub.clear();
    s.sub.push(root);
    let view = oracle.query(root)?;
    s.marked[root as usize] = true;
    let mut undo = vec![root];
    s.ext[1].clear();
    for &(u, _) in view.incident {
        s.marked[u as usize] = true;
        undo.push(u);
        if u > root {
            s.ext[1].push(u);
        }
    }
    let res = rand_esu_extend(oracle, k, root, probs, rng, s, out);
    for v in undo {
        s.marked[v as usize] = false;
    }
    res
}

#[allow(clippy::too_many_arguments)]
fn rand_esu_extend(
    oracle: &mut QueryOracle<'_>,
    k: usize,
    root: NodeId,
    probs: &[f64],
    rng: &mut impl Rng,
    s: &mut Scratch,
    out: &mut Vec<Vec<NodeId>>,
) -> Result<()> {
    let depth = s.sub.len();
    while let Some(w) = s.ext[depth].pop() {
        if rng.random::<f64>() >= probs[depth] {
            continue;
        }
        s.sub.push(w);
        if depth + 1 == k {
            let mut nodes = s.sub.clone();
            nodes.sort_unstable();
            out.push(nodes);
            s.sub.pop();
            continue;
        }
        let view = match oracle.query(w) {
            Ok(v) => v,
            Err(e) => {
                s.sub.pop();
                return Err(e);
            }
        };
        let (left, right) = s.ext.split_at_mut(depth + 1);
        let next = &mut right[0];
        next.clear();
        next.extend_from_slice(&left[depth]);
        let mut undo = Vec::new();
        for &(u, _) in view.incident {
            if u > root && !s.marked[u as usize] {
                s.marked[u as usize] = true;
                undo.push(u);
                next.push(u);
            }
        }
        let res = rand_esu_extend(oracle, k, root, probs, rng, s, out);
        s.sub.pop();
        for v in undo {
            s.marked[v as usize] = false;
        }
        res?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::graph::GraphMode;
    use crate::oracle::{QueryBudget, QueryOracle};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hub5_has_seven_three_node_cises() {
        let g = fixtures::hub5();
        assert_eq!(count_cises(&g, 3), 7);
        assert_eq!(enumerate_cises(&g, 3).len(), 7);
    }

    #[test]
    fn k4_has_four_triangles() {
        let g = fixtures::k4();
        let all = enumerate_cises(&g, 3);
        assert_eq!(all.len(), 4);
        assert!(all.iter().all(|c| c.edge_count() == 3));
    }

    #[test]
    fn hub5_exact_three_node_concentrations() {
        let g = fixtures::hub5();
        let reg = ClassRegistry::build(3, GraphMode::Undirected);
        let counts = exact_class_counts(&g, 3, &reg).unwrap();
        assert_eq!(counts.total, 7);
        assert_eq!(counts.counts, vec![(1, 3), (2, 4)]);
        let conc = exact_concentrations(&g, 3, &reg).unwrap();
        assert!((conc.value_of(1).unwrap() - 3.0 / 7.0).abs() < 1e-12);
        assert!((conc.value_of(2).unwrap() - 4.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn triangle_free_graph_reports_zero_triangles() {
        let g = fixtures::path_graph(6);
        let reg = ClassRegistry::build(3, GraphMode::Undirected);
        let conc = exact_concentrations(&g, 3, &reg).unwrap();
        assert_eq!(conc.value_of(2).unwrap(), 0.0);
        assert!(!conc.observed(2).unwrap());
    }

    #[test]
    fn capped_counts_abort() {
        let g = fixtures::hub5();
        let reg = ClassRegistry::build(3, GraphMode::Undirected);
        assert!(exact_class_counts_capped(&g, 3, &reg, 3).unwrap().is_none());
        let full = exact_class_counts_capped(&g, 3, &reg, 100)
            .unwrap()
            .unwrap();
        assert_eq!(full.total, 7);
    }

    #[test]
    fn relationship_graph_of_hub5() {
        let g = fixtures::hub5();
        let rel = build_relationship_graph(&g, 3, RELATIONSHIP_GUARD).unwrap();
        assert_eq!(rel.node_count(), 7);
        assert_eq!(rel.edge_count(), 15);
        assert!(rel.is_connected());
        assert!(!rel.is_bipartite());
        let tri = rel.index_of(&CisKey::new(&[1, 2, 3])).unwrap();
        assert_eq!(rel.degree(tri), 3);
        let hub_tri = rel.index_of(&CisKey::new(&[0, 1, 2])).unwrap();
        assert_eq!(rel.degree(hub_tri), 5);
    }

    #[test]
    fn relationship_guard_trips() {
        let g = fixtures::hub5();
        assert!(matches!(
            build_relationship_graph(&g, 3, 5),
            Err(Error::GuardExceeded { .. })
        ));
    }

    #[test]
    fn rand_esu_with_unit_probs_is_full_enumeration() {
        let g = fixtures::hub5();
        let mut o = QueryOracle::unlimited(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let out = rand_esu(&mut o, 3, &[1.0, 1.0, 1.0], &mut rng).unwrap();
        assert_eq!(out.samples.len(), 7);
        assert!(!out.truncated);
        assert!(out.samples.iter().all(|&(_, p)| p == 1.0));
    }

    #[test]
    fn rand_esu_half_prob_hits_half_on_average() {
        let g = fixtures::hub5();
        let mut hits = 0usize;
        let runs = 400;
        for seed in 0..runs {
            let mut o = QueryOracle::unlimited(&g);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let out = rand_esu(&mut o, 3, &[1.0, 1.0, 0.5], &mut rng).unwrap();
            assert!((out.inclusion_prob - 0.5).abs() < 1e-12);
            hits += out.samples.len();
        }
        let mean = hits as f64 / runs as f64;
        // expectation is 3.5 subgraphs per run; allow generous noise
        assert!((mean - 3.5).abs() < 0.3, "mean emitted {mean}");
    }

    #[test]
    fn rand_esu_respects_budget() {
        let g = fixtures::p2p_small();
        let mut o = QueryOracle::new(&g, QueryBudget::nodes(20), Default::default());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let out = rand_esu(&mut o, 4, &[1.0, 1.0, 1.0, 1.0], &mut rng).unwrap();
        assert!(out.truncated);
        assert!(o.stats().distinct_queried <= 20);
    }
}
