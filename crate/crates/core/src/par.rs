//! Data-parallel helpers: rayon-backed with the `parallel` feature, plain
//! sequential loops without it. Results never depend on the backend.

use std::cell::Cell;

thread_local! {
    static SEQUENTIAL: Cell<bool> = const { Cell::new(false) };
}

/// Whether the parallel backend is compiled in.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

/// Runs `op` with the helpers below forced onto the calling thread, even
/// when the parallel backend is compiled in. Used to compare both paths.
pub fn sequential<R>(op: impl FnOnce() -> R) -> R {
    let prev = SEQUENTIAL.with(|s| s.replace(true));
    let out = op();
    SEQUENTIAL.with(|s| s.set(prev));
    out
}

#[cfg(feature = "parallel")]
fn forced_sequential() -> bool {
    SEQUENTIAL.with(Cell::get)
}

/// Maps `f` over `items`, preserving order.
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if !forced_sequential() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    items.iter().map(f).collect()
}

/// Folds `f(0) .. f(n-1)` with an associative, commutative `combine`.
pub fn reduce_range<R, F, C>(n: usize, identity: R, f: F, combine: C) -> R
where
    R: Send + Sync + Clone,
    F: Fn(usize) -> R + Sync + Send,
    C: Fn(R, R) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if !forced_sequential() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).reduce(|| identity.clone(), &combine);
    }
    (0..n).map(f).fold(identity, combine)
}

/// Runs `op` with at most `threads` workers for the helpers above
/// (0 means the backend default). Sequential builds ignore the bound.
pub fn with_threads<R: Send>(threads: usize, op: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        if threads > 0 {
            if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
                return pool.install(op);
            }
        }
        op()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        op()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order() {
        let v: Vec<u32> = (0..1000).collect();
        assert_eq!(map(&v, |x| x * 2), v.iter().map(|x| x * 2).collect::<Vec<_>>());
    }

    #[test]
    fn reduce_matches_sequential_sum() {
        assert_eq!(reduce_range(10_001, 0u64, |i| i as u64, |a, b| a + b), 50_005_000);
        assert_eq!(with_threads(2, || reduce_range(0, 7u64, |i| i as u64, |a, b| a + b)), 7);
    }

    #[test]
    fn sequential_mode_gives_the_same_results() {
        let v: Vec<u64> = (0..500).collect();
        let par = map(&v, |x| x * x);
        let seq = sequential(|| map(&v, |x| x * x));
        assert_eq!(par, seq);
        assert_eq!(sequential(|| reduce_range(100, 0u64, |i| i as u64, |a, b| a + b)), 4950);
    }
}
