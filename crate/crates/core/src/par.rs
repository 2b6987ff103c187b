//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) the [`map`] family fans work out over
//! rayon's pool; without it they run on the calling thread. Both paths return
//! results in input order, so every caller stays bit-for-bit deterministic
//! regardless of the feature set or thread count.

/// Applies `f` to `0..n` sequentially.
pub fn map_range_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Applies `f` to `0..n` on the rayon pool, preserving index order.
#[cfg(feature = "parallel")]
pub fn map_range_par<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

/// Applies `f` to `0..n`, in parallel when the `parallel` feature is enabled.
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        map_range_par(n, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_range_seq(n, f)
    }
}

/// Applies `f` to every item of `items`, preserving order.
pub fn map<I, T, F>(items: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    map_range(items.len(), |i| f(&items[i]))
}

/// Sequential counterpart of [`map`].
pub fn map_seq<I, T, F>(items: &[I], f: F) -> Vec<T>
where
    F: Fn(&I) -> T,
{
    items.iter().map(f).collect()
}

/// Parallel counterpart of [`map`], regardless of the default dispatch.
#[cfg(feature = "parallel")]
pub fn map_par<I, T, F>(items: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    map_range_par(items.len(), |i| f(&items[i]))
}
