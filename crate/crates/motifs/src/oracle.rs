//! Crawl-style graph access with budget accounting.
//!
//! All walker access to the graph goes through a per-chain oracle. One
//! query reveals a node's full incident edge set. The first query of a
//! node costs one budget unit and one simulated round trip; repeats are
//! served from an unbounded cache at zero cost, so the budget counts
//! distinct queried nodes. The simulated clock makes time-budget
//! experiments deterministic and machine-independent.

use crate::graph::{EdgeLabel, LabeledGraph, NodeId};
use crate::{Error, Result};

/// Limits on a single chain. `limit_nodes` caps distinct queried nodes;
/// `limit_ms` caps the simulated clock.
#[derive(Debug, Clone, Copy, Default)]
pub struct QueryBudget {
    pub limit_nodes: Option<u64>,
    pub limit_ms: Option<f64>,
}

impl QueryBudget {
    pub fn unlimited() -> QueryBudget {
        QueryBudget::default()
    }

    pub fn nodes(n: u64) -> QueryBudget {
        QueryBudget {
            limit_nodes: Some(n),
            limit_ms: None,
        }
    }
}

/// Simulated cost model: one round trip per fresh query plus a fixed
/// compute charge per walk step.
#[derive(Debug, Clone, Copy)]
pub struct LatencyModel {
    pub per_query_ms: f64,
    pub per_step_compute_ms: f64,
}

impl Default for LatencyModel {
    fn default() -> Self {
        LatencyModel {
            per_query_ms: 0.0,
            per_step_compute_ms: 0.0,
        }
    }
}

/// One node's full incident edge set, as revealed by a query.
#[derive(Debug, Clone, Copy)]
pub struct NodeView<'g> {
    pub node: NodeId,
    pub incident: &'g [(NodeId, EdgeLabel)],
}

impl NodeView<'_> {
    /// Label toward `v`, if adjacent. Incident lists are sorted.
    pub fn edge_to(&self, v: NodeId) -> Option<EdgeLabel> {
        self.incident
            .binary_search_by_key(&v, |&(w, _)| w)
            .ok()
            .map(|i| self.incident[i].1)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OracleStats {
    pub distinct_queried: u64,
    pub simulated_elapsed_ms: f64,
    pub cache_hits: u64,
}

/// Per-chain query mediator over a shared immutable graph.
pub struct QueryOracle<'g> {
    graph: &'g LabeledGraph,
    budget: QueryBudget,
    latency: LatencyModel,
    queried: Vec<bool>,
    stats: OracleStats,
    log: Option<Vec<NodeId>>,
}

impl<'g> QueryOracle<'g> {
    pub fn new(graph: &'g LabeledGraph, budget: QueryBudget, latency: LatencyModel) -> Self {
        QueryOracle {
            graph,
            budget,
            latency,
            queried: vec![false; graph.node_count()],
            stats: OracleStats::default(),
            log: None,
        }
    }

    pub fn unlimited(graph: &'g LabeledGraph) -> Self {
        QueryOracle::new(graph, QueryBudget::unlimited(), LatencyModel::default())
    }

    pub fn graph(&self) -> &'g LabeledGraph {
        self.graph
    }

    /// Record every query call (including cache hits) for replay checks.
    pub fn enable_query_log(&mut self) {
        self.log = Some(Vec::new());
    }

    pub fn query_log(&self) -> Option<&[NodeId]> {
        self.log.as_deref()
    }

    pub fn stats(&self) -> OracleStats {
        self.stats
    }

    /// Reveal `v`'s incident edges. Fresh queries pay budget and latency;
    /// cached repeats are free. Fails with `BudgetExhausted` when a fresh
    /// query would exceed a limit.
    pub fn query(&mut self, v: NodeId) -> Result<NodeView<'g>> {
        let idx = v as usize;
        if idx >= self.queried.len() {
            return Err(Error::NodeOutOfRange(v));
        }
        if let Some(log) = &mut self.log {
            log.push(v);
        }
        if self.queried[idx] {
            self.stats.cache_hits += 1;
        } else {
            if let Some(limit) = self.budget.limit_nodes {
                if self.stats.distinct_queried + 1 > limit {
                    return Err(Error::BudgetExhausted);
                }
            }
            let elapsed = self.stats.simulated_elapsed_ms + self.latency.per_query_ms;
            if let Some(limit) = self.budget.limit_ms {
                if elapsed > limit {
                    return Err(Error::BudgetExhausted);
                }
            }
            self.queried[idx] = true;
            self.stats.distinct_queried += 1;
            self.stats.simulated_elapsed_ms = elapsed;
        }
        Ok(NodeView {
            node: v,
            incident: self.graph.neighbors(v)?,
        })
    }

    /// Charge the per-step compute cost against the simulated clock.
    pub fn charge_step(&mut self) -> Result<()> {
        let elapsed = self.stats.simulated_elapsed_ms + self.latency.per_step_compute_ms;
        if let Some(limit) = self.budget.limit_ms {
            if elapsed > limit {
                return Err(Error::BudgetExhausted);
            }
        }
        self.stats.simulated_elapsed_ms = elapsed;
        Ok(())
    }
}
