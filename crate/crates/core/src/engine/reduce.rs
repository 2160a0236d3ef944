//! Fixed-topology pairwise reduction.
//!
//! The split points depend only on the range length, so floating-point
//! summation order (and therefore the result bits) is independent of how many
//! worker threads execute the two halves.

use std::ops::Range;

/// Ranges of at most this many items are summed sequentially.
pub const LEAF_SIZE: usize = 32;

pub fn tree_reduce<T, L, C>(range: Range<usize>, leaf: &L, combine: &C) -> T
where
    T: Send,
    L: Fn(Range<usize>) -> T + Sync,
    C: Fn(T, T) -> T + Sync,
{
    if range.len() <= LEAF_SIZE {
        return leaf(range);
    }
    let mid = range.start + range.len() / 2;
    let (left, right) = rayon::join(
        || tree_reduce(range.start..mid, leaf, combine),
        || tree_reduce(mid..range.end, leaf, combine),
    );
    combine(left, right)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn result_is_independent_of_worker_count() {
        let values: Vec<f64> = (0..5000).map(|k| ((k as f64) * 0.37).sin() * 1e-3 + 1.0 / (k as f64 + 1.0)).collect();
        let leaf = |r: Range<usize>| values[r].iter().sum::<f64>();
        let combine = |a: f64, b: f64| a + b;
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| tree_reduce(0..values.len(), &leaf, &combine))
        };
        let one = run(1);
        for t in [2, 3, 8] {
            assert_eq!(one.to_bits(), run(t).to_bits());
        }
    }

    #[test]
    fn small_ranges_are_a_single_leaf() {
        let calls = std::sync::atomic::AtomicUsize::new(0);
        let leaf = |r: Range<usize>| {
            calls.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
            r.len()
        };
        assert_eq!(tree_reduce(0..LEAF_SIZE, &leaf, &|a, b| a + b), LEAF_SIZE);
        assert_eq!(calls.load(std::sync::atomic::Ordering::SeqCst), 1);
        assert_eq!(tree_reduce(0..1000, &leaf, &|a, b| a + b), 1000);
    }
}
