//! Deterministic parallel reduction.
//!
//! Sums over transmit elements are split recursively into halves down to a
//! fixed leaf size. The split points depend only on the input length, so the
//! floating point result is bit-identical regardless of how many threads
//! rayon schedules.

use std::ops::Add;

const LEAF: usize = 256;

/// Pairwise sum of `f(i)` for `i in 0..n`.
pub fn pairwise_sum<T, F>(n: usize, zero: T, f: &F) -> T
where
    T: Add<Output = T> + Clone + Send + Sync,
    F: Fn(usize) -> T + Sync,
{
    pairwise_range(0, n, &zero, f)
}

fn pairwise_range<T, F>(lo: usize, hi: usize, zero: &T, f: &F) -> T
where
    T: Add<Output = T> + Clone + Send + Sync,
    F: Fn(usize) -> T + Sync,
{
    let len = hi - lo;
    if len <= LEAF {
        let mut acc = zero.clone();
        for i in lo..hi {
            acc = acc + f(i);
        }
        return acc;
    }
    let mid = lo + len / 2;
    let (a, b) = rayon::join(|| pairwise_range(lo, mid, zero, f), || pairwise_range(mid, hi, zero, f));
    a + b
}
