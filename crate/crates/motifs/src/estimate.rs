//! Self-normalized estimators over walk traces and error metrics over
//! repeated runs.
//!
//! Each estimator streams once over its trace with one accumulator per
//! class and normalizes at the end, so every output sums to one. Classes
//! present in the registry but absent from the trace report zero with an
//! `observed = false` flag to distinguish "never seen" from "estimated
//! zero".

use std::collections::HashMap;

use crate::canon::{CanonicalCode, ClassId, ClassRegistry};
use crate::exact::ClassCounts;
use crate::graph::GraphMode;
use crate::walk::{GuiseTrace, PairTrace, ReduceTrace, WalkTrace};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct ClassShare {
    pub class_id: ClassId,
    pub code: CanonicalCode,
    pub value: f64,
    pub observed: bool,
}

/// Estimated or exact concentrations for one (k, mode).
#[derive(Debug, Clone)]
pub struct ConcentrationVector {
    pub k: usize,
    pub mode: GraphMode,
    /// Ascending by class id; covers every class in the registry snapshot.
    pub shares: Vec<ClassShare>,
    pub total_samples: u64,
}

impl ConcentrationVector {
    fn from_weights(
        k: usize,
        registry: &ClassRegistry,
        weights: &HashMap<ClassId, f64>,
        norm: f64,
        total_samples: u64,
    ) -> ConcentrationVector {
        let shares = registry
            .snapshot()
            .into_iter()
            .map(|info| {
                let w = weights.get(&info.id).copied();
                ClassShare {
                    class_id: info.id,
                    code: info.code,
                    value: w.unwrap_or(0.0) / norm,
                    observed: w.is_some(),
                }
            })
            .collect();
        ConcentrationVector {
            k,
            mode: registry.mode(),
            shares,
            total_samples,
        }
    }

    pub fn from_counts(counts: &ClassCounts, registry: &ClassRegistry) -> ConcentrationVector {
        let weights: HashMap<ClassId, f64> = counts
            .counts
            .iter()
            .filter(|&&(_, c)| c > 0)
            .map(|&(id, c)| (id, c as f64))
            .collect();
        ConcentrationVector::from_weights(
            counts.k,
            registry,
            &weights,
            counts.total as f64,
            counts.total,
        )
    }

    /// Public constructor from per-class weights; normalizes by `norm`.
    pub fn from_class_weights(
        k: usize,
        registry: &ClassRegistry,
        weights: &HashMap<ClassId, f64>,
        norm: f64,
        total_samples: u64,
    ) -> ConcentrationVector {
        ConcentrationVector::from_weights(k, registry, weights, norm, total_samples)
    }

    pub fn value_of(&self, class_id: ClassId) -> Option<f64> {
        self.shares
            .iter()
            .find(|s| s.class_id == class_id)
            .map(|s| s.value)
    }

    pub fn value_of_code(&self, code: &CanonicalCode) -> Option<f64> {
        self.shares
            .iter()
            .find(|s| &s.code == code)
            .map(|s| s.value)
    }

    pub fn observed(&self, class_id: ClassId) -> Option<bool> {
        self.shares
            .iter()
            .find(|s| s.class_id == class_id)
            .map(|s| s.observed)
    }

    pub fn sum(&self) -> f64 {
        self.shares.iter().map(|s| s.value).sum()
    }

    /// L1 distance over classes, matched by id.
    pub fn l1_distance(&self, other: &ConcentrationVector) -> f64 {
        let theirs: HashMap<ClassId, f64> =
            other.shares.iter().map(|s| (s.class_id, s.value)).collect();
        let mut dist = 0.0;
        for s in &self.shares {
            dist += (s.value - theirs.get(&s.class_id).copied().unwrap_or(0.0)).abs();
        }
        for o in &other.shares {
            if self.value_of(o.class_id).is_none() {
                dist += o.value.abs();
            }
        }
        dist
    }
}

/// Inverse-degree weighting of plain-walk samples: class i gets
/// (sum over samples of that class of 1/degree) / (sum of 1/degree).
pub fn ht_node_estimate(
    trace: &WalkTrace,
    registry: &ClassRegistry,
) -> Result<ConcentrationVector> {
    if trace.samples.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let mut weights: HashMap<ClassId, f64> = HashMap::new();
    let mut norm = 0.0;
    for s in &trace.samples {
        debug_assert!(s.degree >= 1);
        let w = 1.0 / s.degree as f64;
        *weights.entry(s.class_id).or_insert(0.0) += w;
        norm += w;
    }
    Ok(ConcentrationVector::from_weights(
        trace.k,
        registry,
        &weights,
        norm,
        trace.samples.len() as u64,
    ))
}

/// Inverse-pair-count weighting of union samples: each union with
/// containment count I carries weight 1/(I(I-1)).
pub fn ht_edge_estimate(
    trace: &PairTrace,
    registry: &ClassRegistry,
) -> Result<ConcentrationVector> {
    if trace.samples.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let mut weights: HashMap<ClassId, f64> = HashMap::new();
    let mut norm = 0.0;
    for s in &trace.samples {
        assert!(s.i_count >= 2, "union containment count must be at least 2");
        let w = 1.0 / (s.i_count as f64 * (s.i_count as f64 - 1.0));
        *weights.entry(s.class_id).or_insert(0.0) += w;
        norm += w;
    }
    Ok(ConcentrationVector::from_weights(
        trace.k,
        registry,
        &weights,
        norm,
        trace.samples.len() as u64,
    ))
}

/// Downward estimate from a size-k walk: every contained (k-1)-node
/// subgraph s' of sample j contributes 1/(d_j * |O(s')|).
pub fn ht_reduce_estimate(
    trace: &ReduceTrace,
    registry: &ClassRegistry,
) -> Result<ConcentrationVector> {
    if trace.samples.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let mut weights: HashMap<ClassId, f64> = HashMap::new();
    let mut norm = 0.0;
    for s in &trace.samples {
        let d = s.degree as f64;
        for e in &s.entries {
            assert!(
                e.containing >= 1,
                "containing count cannot be zero on a connected graph"
            );
            let w = 1.0 / (d * e.containing as f64);
            *weights.entry(e.class_id).or_insert(0.0) += w;
            norm += w;
        }
    }
    Ok(ConcentrationVector::from_weights(
        trace.k,
        registry,
        &weights,
        norm,
        trace.samples.len() as u64,
    ))
}

/// Unweighted class frequencies, for chains whose stationary law is
/// already uniform.
pub fn plain_average(trace: &WalkTrace, registry: &ClassRegistry) -> Result<ConcentrationVector> {
    if trace.samples.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let mut weights: HashMap<ClassId, f64> = HashMap::new();
    for s in &trace.samples {
        *weights.entry(s.class_id).or_insert(0.0) += 1.0;
    }
    Ok(ConcentrationVector::from_weights(
        trace.k,
        registry,
        &weights,
        trace.samples.len() as f64,
        trace.samples.len() as u64,
    ))
}

/// Per-size slice of a mixed 3/4/5 trace, averaged like [`plain_average`].
pub fn guise_size_slice(
    trace: &GuiseTrace,
    size: usize,
    registry: &ClassRegistry,
) -> Result<ConcentrationVector> {
    let mut weights: HashMap<ClassId, f64> = HashMap::new();
    let mut count = 0u64;
    for s in trace.samples.iter().filter(|s| s.size as usize == size) {
        *weights.entry(s.class_id).or_insert(0.0) += 1.0;
        count += 1;
    }
    if count == 0 {
        return Err(Error::EmptyTrace);
    }
    Ok(ConcentrationVector::from_weights(
        size,
        registry,
        &weights,
        count as f64,
        count,
    ))
}

/// Per-class relative error and whole-vector error over repeated runs.
#[derive(Debug, Clone)]
pub struct ErrorReport {
    pub runs: usize,
    /// (class id, relative RMS error), for truth classes with mass > 0.
    pub per_class: Vec<(ClassId, f64)>,
    /// Classes excluded because their true concentration is zero.
    pub excluded: Vec<ClassId>,
    /// Root of the mean squared vector distance to truth.
    pub rmse: f64,
}

impl ErrorReport {
    pub fn class_error(&self, id: ClassId) -> Option<f64> {
        self.per_class
            .iter()
            .find(|&&(c, _)| c == id)
            .map(|&(_, e)| e)
    }

    pub fn mean_class_error(&self) -> f64 {
        if self.per_class.is_empty() {
            return 0.0;
        }
        self.per_class.iter().map(|&(_, e)| e).sum::<f64>() / self.per_class.len() as f64
    }
}

/// Normalized per-class errors sqrt(mean((est - truth)^2)) / truth plus
/// the vector error sqrt(mean(sum_i (est_i - truth_i)^2)), both across the
/// supplied runs.
pub fn error_report(
    estimates: &[ConcentrationVector],
    truth: &ConcentrationVector,
) -> Result<ErrorReport> {
    if estimates.len() < 2 {
        return Err(Error::InvalidConfig(
            "error metrics need at least 2 runs".into(),
        ));
    }
    let runs = estimates.len();
    let mut per_class = Vec::new();
    let mut excluded = Vec::new();
    // matching by canonical code keeps the metrics meaningful even when
    // per-run dynamic registries assigned ids in different orders
    for share in &truth.shares {
        if share.value <= 0.0 {
            excluded.push(share.class_id);
            continue;
        }
        let mse: f64 = estimates
            .iter()
            .map(|est| {
                let v = est.value_of_code(&share.code).unwrap_or(0.0);
                (v - share.value) * (v - share.value)
            })
            .sum::<f64>()
            / runs as f64;
        per_class.push((share.class_id, mse.sqrt() / share.value));
    }
    let mut sq_sum = 0.0;
    for est in estimates {
        let mut sq = 0.0;
        for share in &truth.shares {
            let v = est.value_of_code(&share.code).unwrap_or(0.0);
            sq += (v - share.value) * (v - share.value);
        }
        sq_sum += sq;
    }
    let rmse = (sq_sum / runs as f64).sqrt();
    Ok(ErrorReport {
        runs,
        per_class,
        excluded,
        rmse,
    })
}
