//! Deterministic summation.
//!
//! Every parallel reduction in the crate maps items in parallel, collects the
//! partial results in input order and then sums them with a fixed pairwise
//! tree. The result is therefore bit-identical for any thread count.

use rayon::prelude::*;

const BLOCK: usize = 16;

/// Pairwise sum with a fixed reduction tree (sequential blocks of 16).
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= BLOCK {
        let mut acc = 0.0;
        for v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Maps `f` over `items` in parallel and sums the results deterministically.
pub fn par_map_sum<T, F>(items: &[T], f: F) -> f64
where
    T: Sync,
    F: Fn(&T) -> f64 + Sync + Send,
{
    let parts: Vec<f64> = items.par_iter().map(f).collect();
    pairwise_sum(&parts)
}

/// Ordered parallel map; a thin wrapper so call sites read uniformly.
pub fn par_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.par_iter().map(f).collect()
}
