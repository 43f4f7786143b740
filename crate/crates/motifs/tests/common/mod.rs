#![allow(dead_code)]

//! Shared test oracles, independent of the library's enumeration path:
//! naive subset enumeration and an explicitly materialized mixed-size
//! relationship structure.

use std::collections::HashMap;

use motifs::cis::{induced_cis, Cis, CisKey};
use motifs::graph::LabeledGraph;

/// Every connected induced k-subgraph by brute-force subset enumeration.
/// Only sensible for small n.
pub fn naive_cises(g: &LabeledGraph, k: usize) -> Vec<Cis> {
    let n = g.node_count();
    let mut out = Vec::new();
    let mut pick = Vec::with_capacity(k);
    fn recurse(g: &LabeledGraph, k: usize, start: u32, pick: &mut Vec<u32>, out: &mut Vec<Cis>) {
        if pick.len() == k {
            let cis = induced_cis(g, pick).unwrap();
            if cis.is_connected() {
                out.push(cis);
            }
            return;
        }
        let n = g.node_count() as u32;
        let need = k - pick.len();
        for v in start..=(n - need as u32) {
            pick.push(v);
            recurse(g, k, v + 1, pick, out);
            pick.pop();
        }
    }
    if k >= 1 && k <= n {
        recurse(g, k, 0, &mut pick, &mut out);
    }
    out
}

pub fn naive_keys(g: &LabeledGraph, k: usize) -> Vec<CisKey> {
    let mut keys: Vec<CisKey> = naive_cises(g, k).iter().map(Cis::key).collect();
    keys.sort_unstable();
    keys
}

/// Explicit mixed 3/4/5 relationship structure: node set is every
/// connected induced subgraph of sizes 3-5; edges follow the mixed-walk
/// neighbor rules (3-3 share 2; 3-4 share 3; 4-4 share 3; 4-5 share 4;
/// 5-5 share 4).
pub struct ExplicitMix {
    pub keys: Vec<CisKey>,
    pub degree: HashMap<CisKey, usize>,
}

pub fn explicit_mix(g: &LabeledGraph) -> ExplicitMix {
    let mut keys: Vec<CisKey> = Vec::new();
    for k in 3..=5 {
        keys.extend(naive_keys(g, k));
    }
    let mut degree: HashMap<CisKey, usize> = keys.iter().map(|&k| (k, 0)).collect();
    for i in 0..keys.len() {
        for j in (i + 1)..keys.len() {
            let (a, b) = (keys[i], keys[j]);
            let shared = a.shared_with(&b);
            let adjacent = match (a.len(), b.len()) {
                (3, 3) => shared == 2,
                (3, 4) | (4, 3) => shared == 3,
                (4, 4) => shared == 3,
                (4, 5) | (5, 4) => shared == 4,
                (5, 5) => shared == 4,
                _ => false,
            };
            if adjacent {
                *degree.get_mut(&a).unwrap() += 1;
                *degree.get_mut(&b).unwrap() += 1;
            }
        }
    }
    ExplicitMix { keys, degree }
}

/// L1 distance between an empirical frequency map and a target law over
/// the same support.
pub fn l1_distance(emp: &HashMap<CisKey, f64>, target: &HashMap<CisKey, f64>) -> f64 {
    let mut dist = 0.0;
    for (key, &t) in target {
        dist += (emp.get(key).copied().unwrap_or(0.0) - t).abs();
    }
    for (key, &e) in emp {
        if !target.contains_key(key) {
            dist += e;
        }
    }
    dist
}

/// Normalized visit counts.
pub fn frequencies<I: IntoIterator<Item = CisKey>>(items: I) -> HashMap<CisKey, f64> {
    let mut counts: HashMap<CisKey, u64> = HashMap::new();
    let mut total = 0u64;
    for key in items {
        *counts.entry(key).or_insert(0) += 1;
        total += 1;
    }
    counts
        .into_iter()
        .map(|(k, c)| (k, c as f64 / total as f64))
        .collect()
}
