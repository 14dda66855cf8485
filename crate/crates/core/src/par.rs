//! Data-parallel helpers. With the `parallel` feature these run on the rayon
//! pool; without it they fall back to plain sequential iterators. Results are
//! always returned in input order, so callers behave identically either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// `(0..n).map(f).collect()`, possibly in parallel.
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// `items.iter().map(f).collect()`, possibly in parallel.
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Runs `f` on every item for its side effects.
pub fn for_each_slice<S, F>(items: &[S], f: F)
where
    S: Sync,
    F: Fn(&S) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().for_each(f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().for_each(f)
    }
}

/// True when the crate was built with the rayon backend.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
