//! Everything the walkers need from a current subgraph, computed through
//! the query oracle: the outside frontier, same-size relationship-graph
//! neighbors, containment counts, and contained subgraphs.
//!
//! Querying just the nodes of a k-node subgraph `s` suffices: a candidate
//! neighbor swaps one node of `s` for a frontier node `u`, and all of the
//! candidate's edges lie in `E(s)` together with the cross edges already
//! revealed, so frontier nodes themselves are never queried.

use std::collections::HashMap;

use crate::cis::{connected_under_masks, Cis, MAX_K};
use crate::graph::{EdgeLabel, NodeId};
use crate::oracle::QueryOracle;
use crate::Result;

/// One outside node together with its cross edges into the subgraph.
/// `links` holds (local index of the inside endpoint, label seen from the
/// inside endpoint).
#[derive(Debug, Clone)]
pub struct FrontierEntry {
    pub node: NodeId,
    pub links: Vec<(u8, EdgeLabel)>,
}

/// The set N(s) of outside nodes adjacent to `s`, with the cross edge set.
#[derive(Debug, Clone, Default)]
pub struct Frontier {
    pub entries: Vec<FrontierEntry>,
}

impl Frontier {
    pub fn outside_count(&self) -> usize {
        self.entries.len()
    }

    pub fn outside_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.entries.iter().map(|e| e.node)
    }

    pub fn cross_edge_count(&self) -> usize {
        self.entries.iter().map(|e| e.links.len()).sum()
    }

    /// Cross edges as (inside node, outside node, label from inside view).
    pub fn cross_edges(&self, s: &Cis) -> Vec<(NodeId, NodeId, EdgeLabel)> {
        let mut out = Vec::with_capacity(self.cross_edge_count());
        for e in &self.entries {
            for &(local, label) in &e.links {
                out.push((s.nodes()[local as usize], e.node, label));
            }
        }
        out
    }
}

/// Compute N(s) and the cross edges by querying exactly the nodes of s.
pub fn frontier(oracle: &mut QueryOracle<'_>, s: &Cis) -> Result<Frontier> {
    let mut map: HashMap<NodeId, Vec<(u8, EdgeLabel)>> = HashMap::new();
    for (local, &v) in s.nodes().iter().enumerate() {
        let view = oracle.query(v)?;
        for &(u, label) in view.incident {
            if !s.contains(u) {
                map.entry(u).or_default().push((local as u8, label));
            }
        }
    }
    let mut entries: Vec<FrontierEntry> = map
        .into_iter()
        .map(|(node, links)| FrontierEntry { node, links })
        .collect();
    entries.sort_unstable_by_key(|e| e.node);
    Ok(Frontier { entries })
}

/// Materialized neighbors of `s` in the k-node relationship graph.
/// `origins[i]` records which local node was dropped and which frontier
/// entry supplied the replacement for `neighbors[i]`.
#[derive(Debug, Clone)]
pub struct NeighborSet {
    pub neighbors: Vec<Cis>,
    pub origins: Vec<(u8, u32)>,
}

impl NeighborSet {
    pub fn degree(&self) -> usize {
        self.neighbors.len()
    }
}

/// All k-node subgraphs sharing exactly k-1 nodes with `s`: for every
/// (k-1)-subset of V(s) and every frontier node, keep the induced
/// candidate iff it is connected. Edge sets come from E(s) and the cross
/// edges only; no further queries. Distinct (dropped node, added node)
/// pairs give distinct node sets, so no deduplication is needed.
pub fn neighbor_cises(s: &Cis, f: &Frontier) -> NeighborSet {
    let k = s.k();
    let smasks = s.adjacency_masks();
    let mut neighbors = Vec::new();
    let mut origins = Vec::new();
    let full = (1u64 << k) - 1;
    for (ei, entry) in f.entries.iter().enumerate() {
        let umask: u64 = entry.links.iter().fold(0, |m, &(i, _)| m | (1 << i));
        for drop in 0..k {
            let keep = full & !(1u64 << drop);
            let active = keep | (1 << k);
            let mut masks = [0u64; MAX_K + 1];
            for i in 0..k {
                if i != drop {
                    masks[i] = (smasks[i] & keep) | (((umask >> i) & 1) << k);
                }
            }
            masks[k] = umask & keep;
            if connected_under_masks(&masks[..=k], active) {
                neighbors.push(replace_node(s, drop, entry.node, &entry.links));
                origins.push((drop as u8, ei as u32));
            }
        }
    }
    debug_assert!(
        {
            let mut keys: Vec<_> = neighbors.iter().map(|c| c.key()).collect();
            keys.sort_unstable();
            keys.windows(2).all(|w| w[0] != w[1])
        },
        "neighbor candidates must be distinct"
    );
    NeighborSet { neighbors, origins }
}

/// Number of (k-1)-node connected induced subgraphs contained in `x`:
/// the count of non-cut vertices.
pub fn count_contained(x: &Cis) -> u64 {
    let k = x.k();
    let masks = x.adjacency_masks();
    let full = (1u64 << k) - 1;
    (0..k)
        .filter(|&drop| connected_under_masks(&masks, full & !(1 << drop)))
        .count() as u64
}

/// The contained (k-1)-node subgraphs themselves, one per non-cut vertex,
/// in dropped-index order.
pub fn contained_cises(s: &Cis) -> Vec<Cis> {
    let k = s.k();
    let masks = s.adjacency_masks();
    let full = (1u64 << k) - 1;
    (0..k)
        .filter(|&drop| connected_under_masks(&masks, full & !(1 << drop)))
        .map(|drop| remove_node(s, drop))
        .collect()
}

/// |O(s')| for the next size up: the number of k-node subgraphs containing
/// the (k-1)-node subgraph s'. Every frontier node extends s' to a
/// connected subgraph and nothing else does, so this is |N(s')|. Queries
/// only the nodes of s'.
pub fn containing_count(oracle: &mut QueryOracle<'_>, s_prime: &Cis) -> Result<u64> {
    Ok(frontier(oracle, s_prime)?.outside_count() as u64)
}

/// Extend `s` with outside node `u`; `links` are `u`'s cross edges as in
/// [`FrontierEntry`]. The result is connected whenever `s` is.
pub fn extend_with(s: &Cis, u: NodeId, links: &[(u8, EdgeLabel)]) -> Cis {
    let k = s.k();
    let mut nodes = Vec::with_capacity(k + 1);
    nodes.extend_from_slice(s.nodes());
    let pos = nodes.partition_point(|&x| x < u);
    nodes.insert(pos, u);
    let map_old = |i: usize| if i >= pos { i + 1 } else { i };
    let mut edges = Vec::with_capacity(s.edge_count() + links.len());
    for &(i, j, l) in s.edges() {
        push_normalized(&mut edges, map_old(i as usize), map_old(j as usize), l);
    }
    for &(i, l) in links {
        push_normalized(&mut edges, map_old(i as usize), pos, l);
    }
    edges.sort_unstable_by_key(|&(i, j, _)| (i, j));
    Cis::from_parts(nodes, edges)
}

fn replace_node(s: &Cis, drop: usize, u: NodeId, links: &[(u8, EdgeLabel)]) -> Cis {
    let k = s.k();
    let mut nodes = Vec::with_capacity(k);
    for (i, &v) in s.nodes().iter().enumerate() {
        if i != drop {
            nodes.push(v);
        }
    }
    let pos = nodes.partition_point(|&x| x < u);
    nodes.insert(pos, u);
    let map_old = |i: usize| {
        let base = if i > drop { i - 1 } else { i };
        if base >= pos {
            base + 1
        } else {
            base
        }
    };
    let mut edges = Vec::with_capacity(s.edge_count() + links.len());
    for &(i, j, l) in s.edges() {
        if i as usize == drop || j as usize == drop {
            continue;
        }
        push_normalized(&mut edges, map_old(i as usize), map_old(j as usize), l);
    }
    for &(i, l) in links {
        if i as usize == drop {
            continue;
        }
        push_normalized(&mut edges, map_old(i as usize), pos, l);
    }
    edges.sort_unstable_by_key(|&(i, j, _)| (i, j));
    Cis::from_parts(nodes, edges)
}

fn remove_node(s: &Cis, drop: usize) -> Cis {
    let mut nodes = Vec::with_capacity(s.k() - 1);
    for (i, &v) in s.nodes().iter().enumerate() {
        if i != drop {
            nodes.push(v);
        }
    }
    let map_old = |i: usize| if i > drop { i - 1 } else { i };
    let mut edges = Vec::with_capacity(s.edge_count());
    for &(i, j, l) in s.edges() {
        if i as usize == drop || j as usize == drop {
            continue;
        }
        edges.push((map_old(i as usize) as u8, map_old(j as usize) as u8, l));
    }
    Cis::from_parts(nodes, edges)
}

fn push_normalized(edges: &mut Vec<(u8, u8, EdgeLabel)>, a: usize, b: usize, l: EdgeLabel) {
    if a < b {
        edges.push((a as u8, b as u8, l));
    } else {
        edges.push((b as u8, a as u8, l.reversed()));
    }
}
