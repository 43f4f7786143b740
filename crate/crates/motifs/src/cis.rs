//! Connected induced subgraphs: node sets plus their induced labeled edges.

use crate::graph::{EdgeLabel, LabeledGraph, NodeId};
use crate::{Error, Result};

/// Upper bound on subgraph size for canonical labeling.
pub const MAX_K: usize = 8;

/// Inline capacity of [`CisKey`]; covers the relationship graphs the test
/// oracles materialize on graphs of up to a dozen nodes.
pub const KEY_CAPACITY: usize = 12;

/// A k-node induced subgraph. Nodes are sorted ascending; edges use local
/// indices `i < j` into the node list, with the label expressed from node
/// `i`'s point of view. Connectivity is not enforced by construction:
/// callers check it where required.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cis {
    nodes: Vec<NodeId>,
    edges: Vec<(u8, u8, EdgeLabel)>,
}

impl Cis {
    /// Assemble from parts already in normal form (sorted distinct nodes,
    /// local edge pairs `i < j`).
    pub fn from_parts(nodes: Vec<NodeId>, edges: Vec<(u8, u8, EdgeLabel)>) -> Cis {
        debug_assert!(
            nodes.windows(2).all(|w| w[0] < w[1]),
            "nodes must be sorted distinct"
        );
        debug_assert!(edges
            .iter()
            .all(|&(i, j, _)| i < j && (j as usize) < nodes.len()));
        Cis { nodes, edges }
    }

    pub fn k(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(u8, u8, EdgeLabel)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.nodes.binary_search(&v).is_ok()
    }

    /// Position of `v` in the node list.
    pub fn local_index(&self, v: NodeId) -> Option<usize> {
        self.nodes.binary_search(&v).ok()
    }

    /// Compact identity key (node set only). Requires k <= 8.
    pub fn key(&self) -> CisKey {
        CisKey::new(&self.nodes)
    }

    /// Per-node adjacency bitmasks over local indices.
    pub fn adjacency_masks(&self) -> Vec<u64> {
        let mut masks = vec![0u64; self.k()];
        for &(i, j, _) in &self.edges {
            masks[i as usize] |= 1 << j;
            masks[j as usize] |= 1 << i;
        }
        masks
    }

    /// Whether the undirected skeleton is connected.
    pub fn is_connected(&self) -> bool {
        let k = self.k();
        if k <= 1 {
            return true;
        }
        let masks = self.adjacency_masks();
        connected_under_masks(&masks, (1u64 << k) - 1)
    }
}

/// Breadth-less reachability over bitmask adjacency restricted to `active`.
/// Starts from the lowest active bit.
pub(crate) fn connected_under_masks(masks: &[u64], active: u64) -> bool {
    if active == 0 {
        return true;
    }
    let start = active.trailing_zeros() as usize;
    let mut seen = 1u64 << start;
    loop {
        let mut grew = seen;
        let mut bits = seen;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            grew |= masks[i] & active;
        }
        if grew == seen {
            break;
        }
        seen = grew;
    }
    seen == active
}

/// Induced subgraph of `g` on `nodes`. Errors on duplicates or ids out of
/// range; the caller checks connectivity via [`Cis::is_connected`].
pub fn induced_cis(g: &LabeledGraph, nodes: &[NodeId]) -> Result<Cis> {
    let mut sorted = nodes.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::DuplicateNodes);
    }
    let mut edges = Vec::new();
    for i in 0..sorted.len() {
        for j in (i + 1)..sorted.len() {
            if let Some(label) = g.has_edge(sorted[i], sorted[j])? {
                edges.push((i as u8, j as u8, label));
            }
        }
    }
    Ok(Cis::from_parts(sorted, edges))
}

/// Sorted node-set key, cheap to copy, hash, and order. Used to identify
/// subgraphs in traces and enumeration indexes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CisKey {
    len: u8,
    nodes: [NodeId; KEY_CAPACITY],
}

impl CisKey {
    pub fn new(sorted_nodes: &[NodeId]) -> CisKey {
        assert!(
            sorted_nodes.len() <= KEY_CAPACITY,
            "CisKey supports k <= {KEY_CAPACITY}"
        );
        debug_assert!(sorted_nodes.windows(2).all(|w| w[0] < w[1]));
        let mut nodes = [NodeId::MAX; KEY_CAPACITY];
        nodes[..sorted_nodes.len()].copy_from_slice(sorted_nodes);
        CisKey {
            len: sorted_nodes.len() as u8,
            nodes,
        }
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes[..self.len as usize]
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of nodes shared with another key.
    pub fn shared_with(&self, other: &CisKey) -> usize {
        let (a, b) = (self.nodes(), other.nodes());
        let (mut i, mut j, mut shared) = (0, 0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    shared += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        shared
    }
}

impl std::fmt::Display for CisKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, v) in self.nodes().iter().enumerate() {
            if i > 0 {
                write!(f, "-")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    // hub5 node names: a=0, b=1, c=2, d=3, e=4

    #[test]
    fn induced_triangle() {
        let g = fixtures::hub5();
        let s = induced_cis(&g, &[1, 2, 3]).unwrap();
        assert_eq!(s.edge_count(), 3);
        assert!(s.is_connected());
    }

    #[test]
    fn induced_disconnected_triple() {
        let g = fixtures::hub5();
        let s = induced_cis(&g, &[1, 2, 4]).unwrap();
        assert_eq!(s.edge_count(), 1);
        assert!(!s.is_connected());
    }

    #[test]
    fn induced_single_edge() {
        let g = fixtures::hub5();
        let s = induced_cis(&g, &[0, 4]).unwrap();
        assert_eq!(s.k(), 2);
        assert_eq!(s.edge_count(), 1);
        assert!(s.is_connected());
    }

    #[test]
    fn path_through_hub_is_connected() {
        let g = fixtures::hub5();
        let s = induced_cis(&g, &[0, 1, 4]).unwrap();
        assert_eq!(s.edge_count(), 2);
        assert!(s.is_connected());
    }

    #[test]
    fn duplicate_nodes_rejected() {
        let g = fixtures::hub5();
        assert!(matches!(
            induced_cis(&g, &[1, 1, 2]),
            Err(Error::DuplicateNodes)
        ));
    }

    #[test]
    fn key_ordering_and_sharing() {
        let a = CisKey::new(&[1, 2, 3]);
        let b = CisKey::new(&[1, 2, 4]);
        assert!(a < b);
        assert_eq!(a.shared_with(&b), 2);
        assert_eq!(a.shared_with(&a), 3);
        assert_eq!(format!("{a}"), "1-2-3");
    }
}
