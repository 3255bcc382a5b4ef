//! Thin switch between rayon and sequential iteration.
//!
//! Every sampling loop in the crate funnels through these helpers so the
//! `parallel` feature toggles the backend in one place. The `_seq` variants
//! are always sequential; the benches compare the two directly.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `items` and collect, in parallel when enabled.
pub fn map_collect<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
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

/// Sequential reference version of [`map_collect`].
pub fn map_collect_seq<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Largest value of `f` over `items` (parallel when enabled). NaNs lose.
pub fn max_by<T, F>(items: &[T], f: F) -> f64
where
    T: Sync,
    F: Fn(&T) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items
            .par_iter()
            .map(f)
            .reduce(|| f64::NEG_INFINITY, f64::max)
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// First item failing the predicate, if any (parallel when enabled).
pub fn find_violation<T, F>(items: &[T], ok: F) -> Option<T>
where
    T: Sync + Send + Clone,
    F: Fn(&T) -> bool + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().find_any(|x| !ok(x)).cloned()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().find(|x| !ok(x)).cloned()
    }
}
