//! Data-parallel helpers.
//!
//! With the `parallel` feature the loops below are dispatched to rayon's
//! global pool; without it they run in order on the calling thread. Every
//! helper preserves element order, and reductions are formed from ordered
//! per-row partials, so results do not depend on the thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// True when the crate was built with the `parallel` feature.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

/// Applies `f` to every contiguous row of length `row_len`, passing the row index.
pub(crate) fn for_each_row<T, F>(data: &mut [T], row_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    data.par_chunks_mut(row_len)
        .enumerate()
        .for_each(|(i, row)| f(i, row));
    #[cfg(not(feature = "parallel"))]
    data.chunks_mut(row_len)
        .enumerate()
        .for_each(|(i, row)| f(i, row));
}

/// Like [`for_each_row`] with per-worker scratch state built by `init`.
pub(crate) fn for_each_row_with<T, S, I, F>(data: &mut [T], row_len: usize, init: I, f: F)
where
    T: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    data.par_chunks_mut(row_len).for_each_init(init, f);
    #[cfg(not(feature = "parallel"))]
    {
        let mut scratch = init();
        data.chunks_mut(row_len).for_each(|row| f(&mut scratch, row));
    }
}

/// Evaluates `f(i)` for `i in 0..count`, returning results in index order.
pub(crate) fn map_indices<R, F>(count: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    return (0..count).into_par_iter().map(f).collect();
    #[cfg(not(feature = "parallel"))]
    return (0..count).map(f).collect();
}

/// Evaluates `f` on every item of `items`, returning results in order.
pub fn map_slice<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    return items.par_iter().map(f).collect();
    #[cfg(not(feature = "parallel"))]
    return items.iter().map(f).collect();
}

/// Ordered sum of per-row partial sums of `f` applied to each row.
pub(crate) fn sum_rows<T, F>(data: &[T], row_len: usize, f: F) -> f64
where
    T: Sync,
    F: Fn(&[T]) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    let partials: Vec<f64> = data.par_chunks(row_len).map(f).collect();
    #[cfg(not(feature = "parallel"))]
    let partials: Vec<f64> = data.chunks(row_len).map(f).collect();
    partials.iter().sum()
}

/// Maximum over rows of `f` applied to each row (`0.0` for empty input).
pub(crate) fn max_rows<T, F>(data: &[T], row_len: usize, f: F) -> f64
where
    T: Sync,
    F: Fn(&[T]) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    let partials: Vec<f64> = data.par_chunks(row_len).map(f).collect();
    #[cfg(not(feature = "parallel"))]
    let partials: Vec<f64> = data.chunks(row_len).map(f).collect();
    partials.into_iter().fold(0.0, f64::max)
}
