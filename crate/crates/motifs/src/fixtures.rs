//! Deterministic test and benchmark graphs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;

use crate::graph::{EdgeLabel, GraphMode, LabeledGraph, NodeId};

/// 5-node worked example used throughout the tests: node 0 is adjacent to
/// everything, nodes 1-3 form a triangle, node 4 hangs off node 0 only.
pub fn hub5() -> LabeledGraph {
    from_pairs(5, &[(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (2, 3)])
}

pub fn k4() -> LabeledGraph {
    from_pairs(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])
}

pub fn path_graph(n: usize) -> LabeledGraph {
    let edges: Vec<(NodeId, NodeId)> = (0..n - 1).map(|i| (i as NodeId, i as NodeId + 1)).collect();
    from_pairs(n, &edges)
}

pub fn cycle_graph(n: usize) -> LabeledGraph {
    let mut edges: Vec<(NodeId, NodeId)> =
        (0..n - 1).map(|i| (i as NodeId, i as NodeId + 1)).collect();
    edges.push((0, n as NodeId - 1));
    from_pairs(n, &edges)
}

/// Random connected simple graph: a random recursive tree plus `extra`
/// distinct non-tree edges. Deterministic in `seed`.
pub fn random_connected(n: usize, extra: usize, seed: u64) -> LabeledGraph {
    assert!(n >= 2);
    let max_extra = n * (n - 1) / 2 - (n - 1);
    assert!(extra <= max_extra, "too many extra edges requested");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: HashSet<(NodeId, NodeId)> = HashSet::new();
    for i in 1..n as NodeId {
        let p = rng.random_range(0..i);
        edges.insert((p, i));
    }
    let mut added = 0;
    while added < extra {
        let u = rng.random_range(0..n as NodeId);
        let v = rng.random_range(0..n as NodeId);
        if u == v {
            continue;
        }
        let key = (u.min(v), u.max(v));
        if edges.insert(key) {
            added += 1;
        }
    }
    let pairs: Vec<(NodeId, NodeId)> = {
        let mut v: Vec<_> = edges.into_iter().collect();
        v.sort_unstable();
        v
    };
    from_pairs(n, &pairs)
}

/// Synthetic peer-to-peer-style graph at the scale of the small SNAP p2p
/// snapshots: 6,299 nodes and 20,776 edges, connected by construction,
/// with a heavy-tailed degree profile and enough wedge and square
/// closures to give all but the densest 4-node class non-trivial
/// concentrations.
pub fn p2p_synthetic() -> LabeledGraph {
    synthetic_p2p(6_299, 20_776, 0x9e37_79b9_7f4a_7c15, 2.2, 45, 0.66)
}

/// Scaled-down variant of [`p2p_synthetic`] for quick tests and benches.
pub fn p2p_small() -> LabeledGraph {
    synthetic_p2p(300, 950, 0xdead_beef, 2.2, 40, 0.55)
}

/// Core generator: heavy-tailed degree targets, a preferential tree
/// backbone (which guarantees connectivity and hits the node count
/// exactly), then fill edges split between wedge closures and weighted
/// random pairs until exactly `m` edges exist.
pub fn synthetic_p2p(
    n: usize,
    m: usize,
    seed: u64,
    alpha: f64,
    degree_cap: usize,
    closure_fraction: f64,
) -> LabeledGraph {
    assert!(m >= n - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // inverse-transform draw from a truncated power law, exponent alpha
    let d_min = 2.0f64;
    let weights: Vec<f64> = (0..n)
        .map(|_| {
            let u: f64 = rng.random_range(1e-9..1.0);
            (d_min * u.powf(-1.0 / (alpha - 1.0))).min(degree_cap as f64)
        })
        .collect();

    let mut edges: HashSet<(NodeId, NodeId)> = HashSet::with_capacity(m);
    let mut adj: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    let add = |edges: &mut HashSet<(NodeId, NodeId)>,
               adj: &mut Vec<Vec<NodeId>>,
               u: NodeId,
               v: NodeId|
     -> bool {
        if u == v {
            return false;
        }
        let key = (u.min(v), u.max(v));
        if edges.insert(key) {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
            true
        } else {
            false
        }
    };

    // tree backbone: attach each node to an earlier node chosen with
    // probability proportional to its degree target
    let mut prefix = vec![0.0f64; n];
    prefix[0] = weights[0];
    for i in 1..n {
        prefix[i] = prefix[i - 1] + weights[i];
    }
    for i in 1..n {
        let x: f64 = rng.random_range(0.0..prefix[i - 1]);
        let parent = prefix[..i].partition_point(|&p| p <= x) as NodeId;
        add(&mut edges, &mut adj, parent, i as NodeId);
    }

    // fill phase. Four edge sources, mixed by `closure_fraction`:
    //   - wedge closures over a fixed pool of focus edges, which stack
    //     common neighbors onto the same pair (dense 4-node patterns)
    //   - plain wedge closures (triangles)
    //   - three-path closures (4-cycles)
    //   - degree-weighted random pairs
    let total_w = prefix[n - 1];
    let mut edge_list: Vec<(NodeId, NodeId)> = edges.iter().copied().collect();
    edge_list.sort_unstable();
    let focus: Vec<(NodeId, NodeId)> = (0..150)
        .map(|_| edge_list[rng.random_range(0..edge_list.len())])
        .collect();
    let mut misses = 0u32;
    while edges.len() < m {
        let roll: f64 = rng.random_range(0.0..1.0);
        let candidate = if misses >= 64 || roll >= closure_fraction {
            let draw = |rng: &mut ChaCha8Rng| {
                let x: f64 = rng.random_range(0.0..total_w);
                prefix.partition_point(|&p| p <= x) as NodeId
            };
            Some((draw(&mut rng), draw(&mut rng)))
        } else {
            let share = roll / closure_fraction;
            if share < 0.32 {
                // stack common neighbors onto a focus edge
                let (eu, ev) = focus[rng.random_range(0..focus.len())];
                let (c, v) = if rng.random_range(0.0..1.0) < 0.5 {
                    (eu, ev)
                } else {
                    (ev, eu)
                };
                let w = adj[c as usize][rng.random_range(0..adj[c as usize].len())];
                Some((v, w))
            } else if share < 0.60 {
                // close a wedge at a hub: pick random edge endpoints until
                // one is well connected, so triangles sit in
                // above-average-degree neighborhoods as they do in real
                // social graphs
                let mut pick = None;
                for _ in 0..24 {
                    let (a, b) = edge_list[rng.random_range(0..edge_list.len())];
                    let c = if rng.random_range(0.0..1.0) < 0.5 {
                        a
                    } else {
                        b
                    } as usize;
                    if adj[c].len() >= 25 {
                        pick = Some(c);
                        break;
                    }
                }
                pick.map(|c| {
                    let deg = adj[c].len();
                    let v = adj[c][rng.random_range(0..deg)];
                    let w = adj[c][rng.random_range(0..deg)];
                    (v, w)
                })
            } else {
                // close the three-edge path v - c - w - x into a cycle
                let (eu, ev) = edge_list[rng.random_range(0..edge_list.len())];
                let (c, v) = if rng.random_range(0.0..1.0) < 0.5 {
                    (eu, ev)
                } else {
                    (ev, eu)
                };
                let w = adj[c as usize][rng.random_range(0..adj[c as usize].len())];
                let x = adj[w as usize][rng.random_range(0..adj[w as usize].len())];
                (x != c).then_some((v, x))
            }
        };
        let closed = match candidate {
            Some((u, v)) if add(&mut edges, &mut adj, u, v) => {
                edge_list.push((u.min(v), u.max(v)));
                true
            }
            _ => false,
        };
        misses = if closed { 0 } else { misses + 1 };
        if misses > 10_000 {
            let u = rng.random_range(0..n as NodeId);
            let v = rng.random_range(0..n as NodeId);
            if add(&mut edges, &mut adj, u, v) {
                edge_list.push((u.min(v), u.max(v)));
            }
        }
    }

    let mut pairs: Vec<(NodeId, NodeId)> = edges.into_iter().collect();
    pairs.sort_unstable();
    from_pairs(n, &pairs)
}

/// Serialize as a loadable edge list (original ids).
pub fn to_edge_list(g: &LabeledGraph) -> String {
    let mut out = String::new();
    for (u, v, _) in g.iter_edges() {
        out.push_str(&format!("{} {}\n", g.original_id(u), g.original_id(v)));
    }
    out
}

fn from_pairs(n: usize, pairs: &[(NodeId, NodeId)]) -> LabeledGraph {
    LabeledGraph::from_edges(
        GraphMode::Undirected,
        n,
        pairs.iter().map(|&(u, v)| (u, v, EdgeLabel::PLAIN)),
    )
    .expect("fixture edges are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p2p_synthetic_counts_are_pinned() {
        let g = p2p_synthetic();
        assert_eq!(g.node_count(), 6_299);
        assert_eq!(g.edge_count(), 20_776);
        let lcc = g.largest_connected_component();
        assert_eq!(lcc.node_count(), 6_299);
        assert_eq!(lcc.edge_count(), 20_776);
    }

    #[test]
    fn p2p_synthetic_is_deterministic() {
        assert_eq!(
            p2p_synthetic().content_hash(),
            p2p_synthetic().content_hash()
        );
    }

    #[test]
    fn random_connected_is_connected() {
        for seed in 0..20 {
            let g = random_connected(9, 6, seed);
            assert_eq!(g.largest_connected_component().node_count(), 9);
            assert_eq!(g.edge_count(), 8 + 6);
        }
    }
}
