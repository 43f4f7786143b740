//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) these fan out over the rayon
//! pool; without it they run sequentially. Results are always collected
//! in index order, so outputs are identical either way.

/// Map `f` over `0..n`, collecting in index order.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    map_indexed_seq(n, f)
}

/// Sequential twin of [`map_indexed`], kept unconditionally for the bench
/// comparison and for callers that must stay single-threaded.
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Fold `0..n` into per-worker accumulators and merge them. The merge must
/// be commutative and associative.
#[cfg(feature = "parallel")]
pub fn fold_merge<A, F, M, I>(n: usize, init: I, fold: F, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    F: Fn(A, usize) -> A + Sync + Send,
    M: Fn(A, A) -> A + Sync + Send,
{
    use rayon::prelude::*;
    (0..n)
        .into_par_iter()
        .fold(&init, &fold)
        .reduce(&init, merge)
}

#[cfg(not(feature = "parallel"))]
pub fn fold_merge<A, F, M, I>(n: usize, init: I, fold: F, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    F: Fn(A, usize) -> A + Sync + Send,
    M: Fn(A, A) -> A + Sync + Send,
{
    let _ = merge;
    fold_merge_seq(n, init, fold)
}

pub fn fold_merge_seq<A, F, I>(n: usize, init: I, fold: F) -> A
where
    I: Fn() -> A,
    F: Fn(A, usize) -> A,
{
    (0..n).fold(init(), fold)
}
