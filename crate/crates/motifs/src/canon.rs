//! Canonical codes for small labeled subgraphs and the class registries
//! built from them.
//!
//! A canonical code is the lexicographically minimal upper-triangular
//! labeled adjacency matrix (row-major) over all k! node orderings, with a
//! fixed label-to-byte table per mode. Exhaustive permutation is cheap for
//! k <= 8 and avoids an external canonical-labeling dependency.
//!
//! Built-in registries enumerate every non-isomorphic connected labeled
//! graph on k nodes for (k <= 6, undirected) and (k = 3, directed/signed).
//! Class ids are assigned by sorting codes by (edge count, code), with one
//! documented fixed-up swap in the directed 3-node table so that id 7 is
//! the directed 3-cycle; the export table records the final numbering.
//! For small k the registry also precomputes a direct edge-mask -> class
//! lookup so classification on the walk hot path is O(edges).

use std::collections::HashMap;
use std::sync::RwLock;

use crate::cis::{connected_under_masks, Cis, MAX_K};
use crate::graph::{Direction, EdgeLabel, GraphMode, Sign};
use crate::{Error, Result};

/// 1-based stable class identifier within a registry.
pub type ClassId = u32;

/// Lexicographically minimal labeled adjacency encoding. Length is
/// k(k-1)/2 bytes and depends only on (k, mode).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalCode(Vec<u8>);

impl CanonicalCode {
    pub fn from_bytes(bytes: Vec<u8>) -> CanonicalCode {
        CanonicalCode(bytes)
    }

    pub fn bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:x}")).collect()
    }

    /// Number of skeleton edges (non-zero entries).
    pub fn edge_count(&self) -> usize {
        self.0.iter().filter(|&&b| b != 0).count()
    }
}

fn bits_per_label(mode: GraphMode) -> u32 {
    match mode {
        GraphMode::Undirected => 1,
        GraphMode::Directed | GraphMode::Signed => 2,
    }
}

fn label_byte(label: EdgeLabel, mode: GraphMode) -> u8 {
    match mode {
        GraphMode::Undirected => 1,
        GraphMode::Directed => match label.direction {
            Direction::Forward => 1,
            Direction::Backward => 2,
            Direction::Both => 3,
            Direction::None => 1,
        },
        GraphMode::Signed => match label.sign {
            Sign::Positive => 1,
            Sign::Negative => 2,
            Sign::None => 1,
        },
    }
}

fn reverse_byte(b: u8, mode: GraphMode) -> u8 {
    if mode == GraphMode::Directed {
        match b {
            1 => 2,
            2 => 1,
            other => other,
        }
    } else {
        b
    }
}

#[inline]
fn pair_index(k: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < k);
    i * k - i * (i + 1) / 2 + (j - i - 1)
}

/// Iterative Heap's algorithm over 0..k.
fn for_each_permutation(k: usize, mut f: impl FnMut(&[usize; MAX_K])) {
    let mut p = [0usize; MAX_K];
    for (i, slot) in p.iter_mut().enumerate().take(k) {
        *slot = i;
    }
    let mut c = [0usize; MAX_K];
    f(&p);
    let mut i = 0;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                p.swap(0, i);
            } else {
                p.swap(c[i], i);
            }
            f(&p);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Minimal code over all orderings of the full byte matrix `m`, where
/// `m[a][b]` is the label of edge (a, b) seen from `a` (0 when absent).
fn min_code(k: usize, m: &[[u8; MAX_K]; MAX_K]) -> Vec<u8> {
    let len = k * (k - 1) / 2;
    let mut best = [u8::MAX; 28];
    for_each_permutation(k, |p| {
        let mut buf = [0u8; 28];
        let mut idx = 0;
        for i in 0..k {
            for j in (i + 1)..k {
                buf[idx] = m[p[i]][p[j]];
                idx += 1;
            }
        }
        if buf[..len] < best[..len] {
            best[..len].copy_from_slice(&buf[..len]);
        }
    });
    best[..len].to_vec()
}

/// Canonical code of a subgraph under the given label mode. Permuting the
/// node order of `s` never changes the result. Requires k <= 8.
pub fn canonical_code(s: &Cis, mode: GraphMode) -> Result<CanonicalCode> {
    let k = s.k();
    if k > MAX_K {
        return Err(Error::SizeUnsupported {
            size: k,
            max: MAX_K,
        });
    }
    let mut m = [[0u8; MAX_K]; MAX_K];
    for &(i, j, label) in s.edges() {
        let b = label_byte(label, mode);
        m[i as usize][j as usize] = b;
        m[j as usize][i as usize] = reverse_byte(b, mode);
    }
    Ok(CanonicalCode(min_code(k, &m)))
}

/// Packed per-pair label fields for a subgraph, when they fit in a table
/// index. Matches the layout used by the registry mask tables.
#[allow(clippy::needless_range_loop)]
fn edge_mask(s: &Cis, mode: GraphMode) -> Option<u32> {
    let k = s.k();
    let b = bits_per_label(mode);
    let nbits = (k * (k - 1) / 2) as u32 * b;
    if nbits > 16 {
        return None;
    }
    let mut mask = 0u32;
    for &(i, j, label) in s.edges() {
        let field = label_byte(label, mode) as u32;
        mask |= field << (pair_index(k, i as usize, j as usize) as u32 * b);
    }
    Some(mask)
}

/// Packed label mask of the induced subgraph on `nodes` (sorted), read
/// straight from the graph. Matches the registry mask-table layout.
#[allow(clippy::needless_range_loop)]
pub fn edge_mask_of_nodes(
    g: &crate::graph::LabeledGraph,
    nodes: &[crate::graph::NodeId],
    mode: GraphMode,
) -> Option<u32> {
    let k = nodes.len();
    let b = bits_per_label(mode);
    if (k * (k - 1) / 2) as u32 * b > 16 {
        return None;
    }
    let mut mask = 0u32;
    for i in 0..k {
        for j in (i + 1)..k {
            if let Some(label) = g.has_edge(nodes[i], nodes[j]).ok()? {
                let field = label_byte(label, mode) as u32;
                mask |= field << (pair_index(k, i, j) as u32 * b);
            }
        }
    }
    Some(mask)
}

#[allow(clippy::needless_range_loop)]
fn unpack_mask(k: usize, mode: GraphMode, mask: u32) -> [[u8; MAX_K]; MAX_K] {
    let b = bits_per_label(mode);
    let fmask = (1u32 << b) - 1;
    let mut m = [[0u8; MAX_K]; MAX_K];
    for i in 0..k {
        for j in (i + 1)..k {
            let field = ((mask >> (pair_index(k, i, j) as u32 * b)) & fmask) as u8;
            m[i][j] = field;
            m[j][i] = reverse_byte(field, mode);
        }
    }
    m
}

#[allow(clippy::needless_range_loop)]
fn mask_connected(k: usize, m: &[[u8; MAX_K]; MAX_K]) -> bool {
    let mut masks = vec![0u64; k];
    for (i, mask) in masks.iter_mut().enumerate() {
        for j in 0..k {
            if i != j && m[i][j] != 0 {
                *mask |= 1 << j;
            }
        }
    }
    connected_under_masks(&masks, (1u64 << k) - 1)
}

#[derive(Debug, Clone)]
pub struct ClassInfo {
    pub id: ClassId,
    pub code: CanonicalCode,
    pub name: String,
}

struct Inner {
    classes: Vec<ClassInfo>,
    lookup: HashMap<CanonicalCode, ClassId>,
}

/// Registry of subgraph classes for one (k, mode).
pub struct ClassRegistry {
    mode: GraphMode,
    k: usize,
    dynamic: bool,
    mask_table: Option<Vec<ClassId>>,
    inner: RwLock<Inner>,
}

impl ClassRegistry {
    pub fn builtin_supported(k: usize, mode: GraphMode) -> bool {
        matches!(
            (k, mode),
            (3..=6, GraphMode::Undirected) | (3, GraphMode::Directed) | (3, GraphMode::Signed)
        )
    }

    /// Build the registry for (k, mode). Unsupported built-in combinations
    /// fall back to a dynamic registry that grows from observed codes and
    /// assigns ids in first-seen order per run.
    pub fn build(k: usize, mode: GraphMode) -> ClassRegistry {
        if !Self::builtin_supported(k, mode) {
            return ClassRegistry {
                mode,
                k,
                dynamic: true,
                mask_table: None,
                inner: RwLock::new(Inner {
                    classes: Vec::new(),
                    lookup: HashMap::new(),
                }),
            };
        }
        let b = bits_per_label(mode);
        let pairs = k * (k - 1) / 2;
        let size = 1usize << (pairs as u32 * b);
        let mut mask_codes: Vec<(u32, CanonicalCode)> = Vec::new();
        let mut seen: HashMap<CanonicalCode, usize> = HashMap::new();
        for mask in 0..size as u32 {
            if mode == GraphMode::Signed && has_invalid_field(mask, pairs) {
                continue;
            }
            let m = unpack_mask(k, mode, mask);
            if !mask_connected(k, &m) {
                continue;
            }
            let code = CanonicalCode(min_code(k, &m));
            *seen.entry(code.clone()).or_insert(0) += 1;
            mask_codes.push((mask, code));
        }
        let mut codes: Vec<CanonicalCode> = seen.into_keys().collect();
        codes.sort_by(|a, b| (a.edge_count(), a).cmp(&(b.edge_count(), b)));
        if mode == GraphMode::Directed && k == 3 {
            // fixed documented adjustment: the directed 3-cycle takes id 7
            let cycle = directed_three_cycle_code();
            let pos = codes
                .iter()
                .position(|c| *c == cycle)
                .expect("cycle code present");
            codes.swap(pos, 6);
        }
        let names = name_table(k, mode);
        let mut classes = Vec::with_capacity(codes.len());
        let mut lookup = HashMap::with_capacity(codes.len());
        let mut ordinal_within: HashMap<usize, usize> = HashMap::new();
        for (idx, code) in codes.into_iter().enumerate() {
            let id = (idx + 1) as ClassId;
            let e = code.edge_count();
            let ord = ordinal_within.entry(e).or_insert(0);
            *ord += 1;
            let name = names
                .get(&code)
                .cloned()
                .unwrap_or_else(|| format!("{}{}-e{}-{}", mode_prefix(mode), k, e, ord));
            lookup.insert(code.clone(), id);
            classes.push(ClassInfo { id, code, name });
        }
        let mut table = vec![0 as ClassId; size];
        for (mask, code) in mask_codes {
            table[mask as usize] = lookup[&code];
        }
        ClassRegistry {
            mode,
            k,
            dynamic: false,
            mask_table: Some(table),
            inner: RwLock::new(Inner { classes, lookup }),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn mode(&self) -> GraphMode {
        self.mode
    }

    pub fn is_dynamic(&self) -> bool {
        self.dynamic
    }

    pub fn class_count(&self) -> usize {
        self.inner.read().unwrap().classes.len()
    }

    /// Class of a connected subgraph. Errors if the code is absent from a
    /// built-in registry (registry/mode mismatch); dynamic registries
    /// insert unseen codes instead.
    pub fn classify(&self, s: &Cis) -> Result<ClassId> {
        if s.k() != self.k {
            return Err(Error::InvalidConfig(format!(
                "subgraph size {} does not match registry k={}",
                s.k(),
                self.k
            )));
        }
        if let (Some(table), Some(mask)) = (&self.mask_table, edge_mask(s, self.mode)) {
            let id = table[mask as usize];
            if id == 0 {
                return Err(Error::UnknownClass { k: self.k });
            }
            return Ok(id);
        }
        let code = canonical_code(s, self.mode)?;
        self.class_for_code(code)
    }

    /// Resolve a code to its id, inserting when dynamic.
    pub fn class_for_code(&self, code: CanonicalCode) -> Result<ClassId> {
        {
            let inner = self.inner.read().unwrap();
            if let Some(&id) = inner.lookup.get(&code) {
                return Ok(id);
            }
        }
        if !self.dynamic {
            return Err(Error::UnknownClass { k: self.k });
        }
        let mut inner = self.inner.write().unwrap();
        if let Some(&id) = inner.lookup.get(&code) {
            return Ok(id);
        }
        let id = (inner.classes.len() + 1) as ClassId;
        let name = format!("dyn{}-{}", self.k, id);
        inner.lookup.insert(code.clone(), id);
        inner.classes.push(ClassInfo { id, code, name });
        Ok(id)
    }

    pub fn has_mask_table(&self) -> bool {
        self.mask_table.is_some()
    }

    /// Classify a packed label mask directly, bypassing canonicalization.
    /// None when no table exists or the mask is not a connected graph.
    pub fn classify_mask(&self, mask: u32) -> Option<ClassId> {
        let table = self.mask_table.as_ref()?;
        let id = *table.get(mask as usize)?;
        (id != 0).then_some(id)
    }

    pub fn code_of(&self, id: ClassId) -> Option<CanonicalCode> {
        let inner = self.inner.read().unwrap();
        inner.classes.get(id as usize - 1).map(|c| c.code.clone())
    }

    pub fn name_of(&self, id: ClassId) -> Option<String> {
        let inner = self.inner.read().unwrap();
        inner.classes.get(id as usize - 1).map(|c| c.name.clone())
    }

    pub fn snapshot(&self) -> Vec<ClassInfo> {
        self.inner.read().unwrap().classes.clone()
    }

    /// Text table: class_id, k, mode, code hex, edge list, name.
    pub fn export_table(&self) -> String {
        let mut out = String::from("class_id\tk\tmode\tcode\tedges\tname\n");
        for info in self.snapshot() {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\n",
                info.id,
                self.k,
                self.mode.as_str(),
                info.code.hex(),
                render_edges(&info.code, self.k, self.mode),
                info.name
            ));
        }
        out
    }
}

fn has_invalid_field(mask: u32, pairs: usize) -> bool {
    (0..pairs).any(|p| (mask >> (2 * p)) & 0b11 == 0b11)
}

fn mode_prefix(mode: GraphMode) -> &'static str {
    match mode {
        GraphMode::Undirected => "u",
        GraphMode::Directed => "d",
        GraphMode::Signed => "s",
    }
}

/// Decode a code back into a readable edge list.
fn render_edges(code: &CanonicalCode, k: usize, mode: GraphMode) -> String {
    let mut parts = Vec::new();
    for i in 0..k {
        for j in (i + 1)..k {
            let b = code.bytes()[pair_index(k, i, j)];
            if b == 0 {
                continue;
            }
            let part = match (mode, b) {
                (GraphMode::Undirected, _) => format!("{i}-{j}"),
                (GraphMode::Directed, 1) => format!("{i}>{j}"),
                (GraphMode::Directed, 2) => format!("{j}>{i}"),
                (GraphMode::Directed, _) => format!("{i}<>{j}"),
                (GraphMode::Signed, 1) => format!("{i}-{j}:+"),
                (GraphMode::Signed, _) => format!("{i}-{j}:-"),
            };
            parts.push(part);
        }
    }
    parts.join(",")
}

fn directed_three_cycle_code() -> CanonicalCode {
    let cis = Cis::from_parts(
        vec![0, 1, 2],
        vec![
            (0, 1, EdgeLabel::directed(Direction::Forward)),
            (1, 2, EdgeLabel::directed(Direction::Forward)),
            (0, 2, EdgeLabel::directed(Direction::Backward)),
        ],
    );
    canonical_code(&cis, GraphMode::Directed).unwrap()
}

/// Human names for the small undirected tables, keyed by canonical code.
fn name_table(k: usize, mode: GraphMode) -> HashMap<CanonicalCode, String> {
    let mut names = HashMap::new();
    let mut put = |edges: &[(u8, u8)], name: &str| {
        let cis = Cis::from_parts(
            (0..k as u32).collect(),
            edges
                .iter()
                .map(|&(i, j)| (i, j, EdgeLabel::PLAIN))
                .collect(),
        );
        names.insert(canonical_code(&cis, mode).unwrap(), name.to_string());
    };
    match (k, mode) {
        (3, GraphMode::Undirected) => {
            put(&[(0, 1), (1, 2)], "path3");
            put(&[(0, 1), (1, 2), (0, 2)], "triangle");
        }
        (4, GraphMode::Undirected) => {
            put(&[(0, 1), (0, 2), (0, 3)], "star3");
            put(&[(0, 1), (1, 2), (2, 3)], "path4");
            put(&[(0, 1), (1, 2), (2, 3), (0, 3)], "cycle4");
            put(&[(0, 1), (0, 2), (1, 2), (2, 3)], "tailed-triangle");
            put(&[(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)], "diamond");
            put(&[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)], "clique4");
        }
        (3, GraphMode::Directed) => {
            names.insert(directed_three_cycle_code(), "cycle3-dir".to_string());
        }
        _ => {}
    }
    names
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphMode::*;

    fn relabeled(s: &Cis, perm: &[usize]) -> Cis {
        // apply a node relabeling: new local index of old i is perm[i]
        let k = s.k();
        let mut edges = Vec::new();
        for &(i, j, l) in s.edges() {
            let (a, b) = (perm[i as usize] as u8, perm[j as usize] as u8);
            if a < b {
                edges.push((a, b, l));
            } else {
                edges.push((b, a, l.reversed()));
            }
        }
        Cis::from_parts((0..k as u32).collect(), edges)
    }

    #[test]
    fn triangle_relabelings_share_code() {
        let tri = Cis::from_parts(
            vec![0, 1, 2],
            vec![
                (0, 1, EdgeLabel::PLAIN),
                (0, 2, EdgeLabel::PLAIN),
                (1, 2, EdgeLabel::PLAIN),
            ],
        );
        let code = canonical_code(&tri, Undirected).unwrap();
        for perm in [[0, 1, 2], [1, 0, 2], [2, 1, 0], [1, 2, 0]] {
            assert_eq!(
                canonical_code(&relabeled(&tri, &perm), Undirected).unwrap(),
                code
            );
        }
    }

    #[test]
    fn path_and_triangle_codes_differ() {
        let path = Cis::from_parts(
            vec![0, 1, 2],
            vec![(0, 1, EdgeLabel::PLAIN), (1, 2, EdgeLabel::PLAIN)],
        );
        let tri = Cis::from_parts(
            vec![0, 1, 2],
            vec![
                (0, 1, EdgeLabel::PLAIN),
                (0, 2, EdgeLabel::PLAIN),
                (1, 2, EdgeLabel::PLAIN),
            ],
        );
        assert_ne!(
            canonical_code(&path, Undirected).unwrap(),
            canonical_code(&tri, Undirected).unwrap()
        );
    }

    #[test]
    fn directed_cycle_differs_from_directed_path() {
        let cycle = Cis::from_parts(
            vec![0, 1, 2],
            vec![
                (0, 1, EdgeLabel::directed(Direction::Forward)),
                (1, 2, EdgeLabel::directed(Direction::Forward)),
                (0, 2, EdgeLabel::directed(Direction::Backward)),
            ],
        );
        let path = Cis::from_parts(
            vec![0, 1, 2],
            vec![
                (0, 1, EdgeLabel::directed(Direction::Forward)),
                (1, 2, EdgeLabel::directed(Direction::Forward)),
            ],
        );
        assert_ne!(
            canonical_code(&cycle, Directed).unwrap(),
            canonical_code(&path, Directed).unwrap()
        );
    }

    #[test]
    fn builtin_class_counts() {
        assert_eq!(ClassRegistry::build(3, Undirected).class_count(), 2);
        assert_eq!(ClassRegistry::build(4, Undirected).class_count(), 6);
        assert_eq!(ClassRegistry::build(3, Directed).class_count(), 13);
        assert_eq!(ClassRegistry::build(3, Signed).class_count(), 7);
    }

    #[test]
    fn larger_undirected_counts_match_enumeration() {
        assert_eq!(ClassRegistry::build(5, Undirected).class_count(), 21);
        assert_eq!(ClassRegistry::build(6, Undirected).class_count(), 112);
    }

    #[test]
    fn undirected3_anchors() {
        let reg = ClassRegistry::build(3, Undirected);
        assert_eq!(reg.name_of(1).unwrap(), "path3");
        assert_eq!(reg.name_of(2).unwrap(), "triangle");
    }

    #[test]
    fn directed_cycle_is_class_seven() {
        let reg = ClassRegistry::build(3, Directed);
        assert_eq!(reg.code_of(7).unwrap(), directed_three_cycle_code());
        assert_eq!(reg.name_of(7).unwrap(), "cycle3-dir");
    }

    #[test]
    fn signed_triangle_classifies() {
        let reg = ClassRegistry::build(3, Signed);
        let tri = Cis::from_parts(
            vec![0, 1, 2],
            vec![
                (0, 1, EdgeLabel::signed(Sign::Positive)),
                (0, 2, EdgeLabel::signed(Sign::Positive)),
                (1, 2, EdgeLabel::signed(Sign::Positive)),
            ],
        );
        let id = reg.classify(&tri).unwrap();
        assert!((1..=7).contains(&id));
        // all-positive triangle is distinct from one with a negative edge
        let mixed = Cis::from_parts(
            vec![0, 1, 2],
            vec![
                (0, 1, EdgeLabel::signed(Sign::Positive)),
                (0, 2, EdgeLabel::signed(Sign::Positive)),
                (1, 2, EdgeLabel::signed(Sign::Negative)),
            ],
        );
        assert_ne!(reg.classify(&mixed).unwrap(), id);
    }

    #[test]
    fn unsupported_builtin_falls_back_to_dynamic() {
        let reg = ClassRegistry::build(4, Directed);
        assert!(reg.is_dynamic());
        assert_eq!(reg.class_count(), 0);
        let star = Cis::from_parts(
            vec![0, 1, 2, 3],
            vec![
                (0, 1, EdgeLabel::directed(Direction::Forward)),
                (0, 2, EdgeLabel::directed(Direction::Forward)),
                (0, 3, EdgeLabel::directed(Direction::Forward)),
            ],
        );
        let id = reg.classify(&star).unwrap();
        assert_eq!(id, 1);
        assert_eq!(reg.classify(&star).unwrap(), 1);
        assert_eq!(reg.class_count(), 1);
    }

    #[test]
    fn mismatched_code_is_error_on_builtin() {
        let reg = ClassRegistry::build(3, Undirected);
        let directed = Cis::from_parts(
            vec![0, 1, 2],
            vec![
                (0, 1, EdgeLabel::directed(Direction::Forward)),
                (1, 2, EdgeLabel::directed(Direction::Forward)),
            ],
        );
        // direction collapses in undirected byte table, so this classifies;
        // a wrong-k subgraph is the real mismatch case
        assert!(reg.classify(&directed).is_ok());
        let edge = Cis::from_parts(vec![0, 1], vec![(0, 1, EdgeLabel::PLAIN)]);
        assert!(reg.classify(&edge).is_err());
    }

    #[test]
    fn export_table_lists_all_classes() {
        let reg = ClassRegistry::build(4, Undirected);
        let table = reg.export_table();
        assert_eq!(table.lines().count(), 7); // header + 6 classes
        assert!(table.contains("clique4"));
        assert!(table.contains("0-1"));
    }

    #[test]
    fn code_length_depends_only_on_k() {
        let reg = ClassRegistry::build(4, Undirected);
        for info in reg.snapshot() {
            assert_eq!(info.code.bytes().len(), 6);
        }
    }
}
