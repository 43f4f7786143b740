//! Labeled graph storage and SNAP-style edge list loading.
//!
//! Graphs are immutable once built. Adjacency uses a CSR layout with each
//! row sorted by neighbor id, so `neighbors` is a slice borrow and
//! `has_edge` a binary search. External node ids are remapped to dense
//! indices at load time and the original ids kept in a sidecar table for
//! reporting.

use std::collections::HashMap;
use std::io::BufRead;

use crate::{Error, Result};

/// Dense node index, `0..|V|`.
pub type NodeId = u32;

/// Edge-label interpretation of the graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphMode {
    Undirected,
    Directed,
    Signed,
}

impl GraphMode {
    pub fn as_str(self) -> &'static str {
        match self {
            GraphMode::Undirected => "undirected",
            GraphMode::Directed => "directed",
            GraphMode::Signed => "signed",
        }
    }
}

impl std::str::FromStr for GraphMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "undirected" | "u" => Ok(GraphMode::Undirected),
            "directed" | "d" => Ok(GraphMode::Directed),
            "signed" | "s" => Ok(GraphMode::Signed),
            other => Err(Error::InvalidConfig(format!("unknown mode `{other}`"))),
        }
    }
}

/// Direction of an edge as seen from one endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Forward,
    Backward,
    Both,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Positive,
    Negative,
    None,
}

/// Label attached to every skeleton edge. Direction is `None` unless the
/// graph is directed; sign is `None` unless it is signed. Labels are stored
/// per endpoint view: the label of `(u, v)` seen from `v` is the
/// direction-reversed label seen from `u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EdgeLabel {
    pub direction: Direction,
    pub sign: Sign,
}

impl EdgeLabel {
    pub const PLAIN: EdgeLabel = EdgeLabel {
        direction: Direction::None,
        sign: Sign::None,
    };

    pub fn directed(direction: Direction) -> Self {
        EdgeLabel {
            direction,
            sign: Sign::None,
        }
    }

    pub fn signed(sign: Sign) -> Self {
        EdgeLabel {
            direction: Direction::None,
            sign,
        }
    }

    /// The same edge viewed from the other endpoint.
    pub fn reversed(self) -> Self {
        let direction = match self.direction {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
            other => other,
        };
        EdgeLabel {
            direction,
            sign: self.sign,
        }
    }
}

/// Immutable labeled graph over dense node ids.
#[derive(Debug, Clone)]
pub struct LabeledGraph {
    mode: GraphMode,
    offsets: Vec<usize>,
    adj: Vec<(NodeId, EdgeLabel)>,
    edge_count: u64,
    original_ids: Vec<u64>,
}

impl LabeledGraph {
    pub fn mode(&self) -> GraphMode {
        self.mode
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of skeleton (undirected) edges.
    pub fn edge_count(&self) -> u64 {
        self.edge_count
    }

    pub fn degree(&self, v: NodeId) -> Result<usize> {
        Ok(self.neighbors(v)?.len())
    }

    /// Incident edges of `v`, sorted ascending by neighbor id. Labels are
    /// expressed from `v`'s point of view.
    pub fn neighbors(&self, v: NodeId) -> Result<&[(NodeId, EdgeLabel)]> {
        let v = v as usize;
        if v + 1 >= self.offsets.len() {
            return Err(Error::NodeOutOfRange(v as NodeId));
        }
        Ok(&self.adj[self.offsets[v]..self.offsets[v + 1]])
    }

    /// Label of the edge `(u, v)` from `u`'s point of view, if present.
    pub fn has_edge(&self, u: NodeId, v: NodeId) -> Result<Option<EdgeLabel>> {
        let row = self.neighbors(u)?;
        if v as usize >= self.node_count() {
            return Err(Error::NodeOutOfRange(v));
        }
        Ok(row
            .binary_search_by_key(&v, |&(w, _)| w)
            .ok()
            .map(|i| row[i].1))
    }

    /// External id the node carried in the input file.
    pub fn original_id(&self, v: NodeId) -> u64 {
        self.original_ids[v as usize]
    }

    /// Skeleton edges `(u, v, label)` with `u < v`, label from `u`'s view.
    pub fn iter_edges(&self) -> impl Iterator<Item = (NodeId, NodeId, EdgeLabel)> + '_ {
        (0..self.node_count() as NodeId).flat_map(move |u| {
            self.neighbors(u)
                .unwrap()
                .iter()
                .filter(move |&&(v, _)| v > u)
                .map(move |&(v, l)| (u, v, l))
        })
    }

    /// Stable content hash over mode, size, and the labeled edge set keyed
    /// by original ids, so it is independent of input line order. Used to
    /// key ground-truth cache files.
    pub fn content_hash(&self) -> u64 {
        let mut edges: Vec<(u64, u64, u8)> = self
            .iter_edges()
            .map(|(u, v, l)| {
                let (ou, ov) = (self.original_id(u), self.original_id(v));
                if ou <= ov {
                    (ou, ov, label_hash_byte(l))
                } else {
                    (ov, ou, label_hash_byte(l.reversed()))
                }
            })
            .collect();
        edges.sort_unstable();
        let mut h = Fnv::new();
        h.byte(match self.mode {
            GraphMode::Undirected => 0,
            GraphMode::Directed => 1,
            GraphMode::Signed => 2,
        });
        h.u64(self.node_count() as u64);
        for (u, v, l) in edges {
            h.u64(u);
            h.u64(v);
            h.byte(l);
        }
        h.finish()
    }

    /// Build from dense-id edge triples. Self-loops are dropped and
    /// duplicates merged under the same rules as `load_edge_list`.
    pub fn from_edges(
        mode: GraphMode,
        node_count: usize,
        edges: impl IntoIterator<Item = (NodeId, NodeId, EdgeLabel)>,
    ) -> Result<LabeledGraph> {
        let mut merged: HashMap<(NodeId, NodeId), EdgeLabel> = HashMap::new();
        for (u, v, label) in edges {
            if u as usize >= node_count || v as usize >= node_count {
                return Err(Error::NodeOutOfRange(u.max(v)));
            }
            merge_edge(&mut merged, mode, u, v, label);
        }
        if merged.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let original_ids = (0..node_count as u64).collect();
        Ok(assemble(mode, node_count, merged, original_ids))
    }

    /// Induced subgraph on the largest weakly-connected component of the
    /// skeleton, with re-densified ids. Ties between equal-sized components
    /// break toward the one containing the smallest original id.
    pub fn largest_connected_component(&self) -> LabeledGraph {
        let n = self.node_count();
        let mut comp = vec![usize::MAX; n];
        let mut comps: Vec<Vec<NodeId>> = Vec::new();
        let mut stack = Vec::new();
        for s in 0..n {
            if comp[s] != usize::MAX {
                continue;
            }
            let id = comps.len();
            let mut members = Vec::new();
            comp[s] = id;
            stack.push(s as NodeId);
            while let Some(v) = stack.pop() {
                members.push(v);
                for &(w, _) in self.neighbors(v).unwrap() {
                    if comp[w as usize] == usize::MAX {
                        comp[w as usize] = id;
                        stack.push(w);
                    }
                }
            }
            members.sort_unstable();
            comps.push(members);
        }
        let best = comps
            .iter()
            .enumerate()
            .min_by_key(|(_, m)| {
                let min_orig = m.iter().map(|&v| self.original_id(v)).min().unwrap();
                (std::cmp::Reverse(m.len()), min_orig)
            })
            .map(|(i, _)| i)
            .unwrap();
        let members = &comps[best];
        let mut remap = vec![NodeId::MAX; n];
        for (new, &old) in members.iter().enumerate() {
            remap[old as usize] = new as NodeId;
        }
        let mut merged: HashMap<(NodeId, NodeId), EdgeLabel> = HashMap::new();
        for (u, v, l) in self.iter_edges() {
            let (nu, nv) = (remap[u as usize], remap[v as usize]);
            if nu != NodeId::MAX && nv != NodeId::MAX {
                // already normalized u < v and members are sorted, so nu < nv
                merged.insert((nu, nv), l);
            }
        }
        let original_ids = members.iter().map(|&v| self.original_id(v)).collect();
        assemble(self.mode, members.len(), merged, original_ids)
    }
}

/// Parse a whitespace-separated edge list: `u v` per line, or `u v s` with
/// `s` in `{+1, -1}` for signed mode. Lines starting with `#` are comments.
/// Self-loops are dropped. Duplicate and reciprocal directed edges merge
/// into one skeleton edge (reciprocal pairs become direction `both`);
/// duplicate signed edges keep the first sign seen.
pub fn load_edge_list<R: BufRead>(reader: R, mode: GraphMode) -> Result<LabeledGraph> {
    let mut ids: HashMap<u64, NodeId> = HashMap::new();
    let mut original_ids: Vec<u64> = Vec::new();
    let mut intern = |ext: u64| -> NodeId {
        *ids.entry(ext).or_insert_with(|| {
            original_ids.push(ext);
            (original_ids.len() - 1) as NodeId
        })
    };
    let mut merged: HashMap<(NodeId, NodeId), EdgeLabel> = HashMap::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let err = |msg: &str| Error::Parse {
            line: lineno + 1,
            msg: msg.to_string(),
        };
        let u: u64 = parts
            .next()
            .ok_or_else(|| err("missing source"))?
            .parse()
            .map_err(|_| err("bad source id"))?;
        let v: u64 = parts
            .next()
            .ok_or_else(|| err("missing target"))?
            .parse()
            .map_err(|_| err("bad target id"))?;
        let label = match mode {
            GraphMode::Undirected => EdgeLabel::PLAIN,
            GraphMode::Directed => EdgeLabel::directed(Direction::Forward),
            GraphMode::Signed => {
                let s = parts.next().ok_or_else(|| err("missing sign"))?;
                match s {
                    "+1" | "1" => EdgeLabel::signed(Sign::Positive),
                    "-1" => EdgeLabel::signed(Sign::Negative),
                    _ => return Err(err("bad sign (want +1 or -1)")),
                }
            }
        };
        if mode != GraphMode::Signed && parts.next().is_some() {
            return Err(err("trailing tokens"));
        }
        if mode == GraphMode::Signed && parts.next().is_some() {
            return Err(err("trailing tokens"));
        }
        let (du, dv) = (intern(u), intern(v));
        merge_edge(&mut merged, mode, du, dv, label);
    }
    if merged.is_empty() {
        return Err(Error::EmptyGraph);
    }
    Ok(assemble(mode, original_ids.len(), merged, original_ids))
}

/// Merge one input edge into the skeleton map. Keys are `(min, max)` with
/// the label expressed from the smaller endpoint's view.
fn merge_edge(
    merged: &mut HashMap<(NodeId, NodeId), EdgeLabel>,
    mode: GraphMode,
    u: NodeId,
    v: NodeId,
    label: EdgeLabel,
) {
    if u == v {
        return;
    }
    let (key, label) = if u < v {
        ((u, v), label)
    } else {
        ((v, u), label.reversed())
    };
    match merged.entry(key) {
        std::collections::hash_map::Entry::Vacant(e) => {
            e.insert(label);
        }
        std::collections::hash_map::Entry::Occupied(mut e) => {
            if mode == GraphMode::Directed && e.get().direction != label.direction {
                e.insert(EdgeLabel::directed(Direction::Both));
            }
            // undirected duplicates and signed conflicts keep the first entry
        }
    }
}

fn assemble(
    mode: GraphMode,
    node_count: usize,
    merged: HashMap<(NodeId, NodeId), EdgeLabel>,
    original_ids: Vec<u64>,
) -> LabeledGraph {
    let mut rows: Vec<Vec<(NodeId, EdgeLabel)>> = vec![Vec::new(); node_count];
    let edge_count = merged.len() as u64;
    for ((u, v), l) in merged {
        rows[u as usize].push((v, l));
        rows[v as usize].push((u, l.reversed()));
    }
    let mut offsets = Vec::with_capacity(node_count + 1);
    let mut adj = Vec::with_capacity(2 * edge_count as usize);
    offsets.push(0);
    for mut row in rows {
        row.sort_unstable_by_key(|&(w, _)| w);
        adj.extend_from_slice(&row);
        offsets.push(adj.len());
    }
    LabeledGraph {
        mode,
        offsets,
        adj,
        edge_count,
        original_ids,
    }
}

fn label_hash_byte(l: EdgeLabel) -> u8 {
    let d = match l.direction {
        Direction::None => 0,
        Direction::Forward => 1,
        Direction::Backward => 2,
        Direction::Both => 3,
    };
    let s = match l.sign {
        Sign::None => 0,
        Sign::Positive => 1,
        Sign::Negative => 2,
    };
    d | (s << 2)
}

struct Fnv(u64);

impl Fnv {
    fn new() -> Fnv {
        Fnv(0xcbf2_9ce4_8422_2325)
    }
    fn byte(&mut self, b: u8) {
        self.0 ^= b as u64;
        self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
    }
    fn u64(&mut self, x: u64) {
        for b in x.to_le_bytes() {
            self.byte(b);
        }
    }
    fn finish(&self) -> u64 {
        self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use std::io::Cursor;

    fn load(text: &str, mode: GraphMode) -> Result<LabeledGraph> {
        load_edge_list(Cursor::new(text), mode)
    }

    #[test]
    fn single_edge() {
        let g = load("0 1\n", GraphMode::Undirected).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.degree(0).unwrap(), 1);
    }

    #[test]
    fn comments_blank_lines_and_duplicates() {
        let g = load("# header\n\n0 1\n1 0\n0 1\n1 2\n", GraphMode::Undirected).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn self_loops_dropped() {
        let g = load("0 0\n0 1\n", GraphMode::Undirected).unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn malformed_line_reports_number() {
        let e = load("0 1\nx y\n", GraphMode::Undirected).unwrap_err();
        match e {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_input_is_error() {
        assert!(matches!(
            load("# nothing\n", GraphMode::Undirected),
            Err(Error::EmptyGraph)
        ));
    }

    #[test]
    fn reciprocal_directed_edges_collapse_to_both() {
        let g = load("0 1\n1 0\n", GraphMode::Directed).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(
            g.has_edge(0, 1).unwrap().unwrap().direction,
            Direction::Both
        );
    }

    #[test]
    fn directed_label_round_trip() {
        let g = load("0 1\n2 1\n", GraphMode::Directed).unwrap();
        for (u, v, l) in g.iter_edges().collect::<Vec<_>>() {
            let back = g.has_edge(v, u).unwrap().unwrap();
            assert_eq!(back, l.reversed());
        }
        assert_eq!(
            g.has_edge(0, 1).unwrap().unwrap().direction,
            Direction::Forward
        );
        assert_eq!(
            g.has_edge(1, 2).unwrap().unwrap().direction,
            Direction::Backward
        );
    }

    #[test]
    fn signed_edges_carry_sign() {
        let g = load("0 1 +1\n1 2 -1\n", GraphMode::Signed).unwrap();
        assert_eq!(g.has_edge(0, 1).unwrap().unwrap().sign, Sign::Positive);
        assert_eq!(g.has_edge(2, 1).unwrap().unwrap().sign, Sign::Negative);
    }

    #[test]
    fn absent_edge_and_range_errors() {
        let g = load("0 1\n", GraphMode::Undirected).unwrap();
        assert!(g.has_edge(0, 0).unwrap().is_none());
        assert!(g.neighbors(7).is_err());
        assert!(g.has_edge(0, 9).is_err());
    }

    #[test]
    fn degree_sum_is_twice_edges() {
        let g = fixtures::hub5();
        let total: usize = (0..g.node_count() as NodeId)
            .map(|v| g.degree(v).unwrap())
            .sum();
        assert_eq!(total as u64, 2 * g.edge_count());
    }

    #[test]
    fn hub5_shape() {
        let g = fixtures::hub5();
        assert_eq!(g.node_count(), 5);
        assert_eq!(g.edge_count(), 7);
        assert_eq!(g.degree(0).unwrap(), 4);
    }

    #[test]
    fn lcc_identity_on_connected_graph() {
        let g = fixtures::hub5();
        let lcc = g.largest_connected_component();
        assert_eq!(lcc.node_count(), 5);
        assert_eq!(lcc.edge_count(), 7);
    }

    #[test]
    fn lcc_idempotent() {
        let g = load("0 1\n1 2\n5 6\n", GraphMode::Undirected).unwrap();
        let l1 = g.largest_connected_component();
        let l2 = l1.largest_connected_component();
        assert_eq!(l1.node_count(), l2.node_count());
        assert_eq!(l1.edge_count(), l2.edge_count());
        assert_eq!(l1.content_hash(), l2.content_hash());
    }

    #[test]
    fn lcc_tie_breaks_on_smallest_original_id() {
        // two triangles of equal size plus an isolated edge; the component
        // containing external id 3 must win over the one with ids 10..12
        let g = load(
            "10 11\n11 12\n12 10\n3 4\n4 5\n5 3\n100 101\n",
            GraphMode::Undirected,
        )
        .unwrap();
        let lcc = g.largest_connected_component();
        assert_eq!(lcc.node_count(), 3);
        let mut orig: Vec<u64> = (0..3).map(|v| lcc.original_id(v)).collect();
        orig.sort_unstable();
        assert_eq!(orig, vec![3, 4, 5]);
    }

    #[test]
    fn content_hash_ignores_load_order() {
        let a = load("0 1\n1 2\n", GraphMode::Undirected).unwrap();
        let b = load("1 2\n0 1\n", GraphMode::Undirected).unwrap();
        assert_eq!(a.content_hash(), b.content_hash());
    }
}
