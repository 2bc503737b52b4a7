//! Data-parallel helpers. With the `parallel` feature these dispatch to
//! rayon; without it they run the same closures sequentially.
//!
//! Reductions go through fixed-size blocks whose partial results are
//! combined in index order, so sums are bitwise identical between the two
//! builds and across thread counts.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Block length for ordered reductions.
pub(crate) const REDUCE_BLOCK: usize = 4096;

#[cfg(feature = "parallel")]
pub(crate) fn for_each_chunk_mut<T, F>(data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    data.par_chunks_mut(chunk)
        .enumerate()
        .for_each(|(i, c)| f(i, c));
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn for_each_chunk_mut<T, F>(data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    data.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
}

/// Apply `f(flat_index, &mut value)` to every element.
pub(crate) fn for_each_indexed<T, F>(data: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    for_each_chunk_mut(data, REDUCE_BLOCK, |block, chunk| {
        let base = block * REDUCE_BLOCK;
        for (i, v) in chunk.iter_mut().enumerate() {
            f(base + i, v);
        }
    });
}

#[cfg(feature = "parallel")]
pub(crate) fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Deterministic sum of `f(i)` for `i in 0..n`.
pub(crate) fn ordered_sum<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let blocks = n.div_ceil(REDUCE_BLOCK);
    map_range(blocks, |b| {
        let lo = b * REDUCE_BLOCK;
        let hi = (lo + REDUCE_BLOCK).min(n);
        (lo..hi).map(&f).sum::<f64>()
    })
    .into_iter()
    .sum()
}

/// Deterministic maximum of `f(i)` for `i in 0..n` (0 for empty ranges).
pub(crate) fn ordered_max<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let blocks = n.div_ceil(REDUCE_BLOCK);
    map_range(blocks, |b| {
        let lo = b * REDUCE_BLOCK;
        let hi = (lo + REDUCE_BLOCK).min(n);
        (lo..hi).map(&f).fold(0.0_f64, f64::max)
    })
    .into_iter()
    .fold(0.0, f64::max)
}

/// Deterministic complex sum, same blocking as [`ordered_sum`].
pub(crate) fn ordered_sum_complex<F>(n: usize, f: F) -> num_complex::Complex64
where
    F: Fn(usize) -> num_complex::Complex64 + Sync + Send,
{
    let blocks = n.div_ceil(REDUCE_BLOCK);
    map_range(blocks, |b| {
        let lo = b * REDUCE_BLOCK;
        let hi = (lo + REDUCE_BLOCK).min(n);
        (lo..hi).map(&f).sum::<num_complex::Complex64>()
    })
    .into_iter()
    .sum()
}
