//! Deterministic execution helpers.
//!
//! All floating-point reductions in the crate run over a fixed binary tree
//! with a hard-coded leaf size. The tree shape depends only on the input
//! length, never on thread count, so sums are bit-identical across runs,
//! across worker pools, and across the `parallel`/sequential builds. The
//! `*_seq` variants are always compiled; benches use them as the baseline.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Leaf size of the reduction tree. Part of the determinism contract:
/// changing it changes the grouping of floating-point additions.
const LEAF: usize = 1024;

/// Sum `f(i)` over `0..n` on the fixed tree, joining subtrees in parallel
/// when the feature is enabled.
pub fn tree_sum_by<F>(n: usize, f: &F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    sum_range(0, n, f)
}

/// Sequential reference path; bit-identical to [`tree_sum_by`].
pub fn tree_sum_by_seq<F>(n: usize, f: &F) -> f64
where
    F: Fn(usize) -> f64,
{
    sum_range_seq(0, n, f)
}

/// Sum a slice on the fixed tree.
pub fn tree_sum(values: &[f64]) -> f64 {
    tree_sum_by(values.len(), &|i| values[i])
}

fn sum_range<F>(lo: usize, hi: usize, f: &F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let len = hi - lo;
    if len <= LEAF {
        let mut s = 0.0;
        for i in lo..hi {
            s += f(i);
        }
        return s;
    }
    let mid = lo + len / 2;
    #[cfg(feature = "parallel")]
    {
        let (a, b) = rayon::join(|| sum_range(lo, mid, f), || sum_range(mid, hi, f));
        a + b
    }
    #[cfg(not(feature = "parallel"))]
    {
        sum_range(lo, mid, f) + sum_range(mid, hi, f)
    }
}

fn sum_range_seq<F>(lo: usize, hi: usize, f: &F) -> f64
where
    F: Fn(usize) -> f64,
{
    let len = hi - lo;
    if len <= LEAF {
        let mut s = 0.0;
        for i in lo..hi {
            s += f(i);
        }
        return s;
    }
    let mid = lo + len / 2;
    sum_range_seq(lo, mid, f) + sum_range_seq(mid, hi, f)
}

/// Map `0..n` preserving index order.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
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

/// Sequential reference path for [`map_indexed`].
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Run `f(chunk_index, chunk)` over fixed-size chunks of `data`.
/// Chunk boundaries depend only on `chunk`, so writes are deterministic.
pub fn for_each_chunk_mut<T, F>(data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync,
{
    assert!(chunk > 0);
    #[cfg(feature = "parallel")]
    {
        data.par_chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
    }
    #[cfg(not(feature = "parallel"))]
    {
        data.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
    }
}

/// Sequential reference path for [`for_each_chunk_mut`].
pub fn for_each_chunk_mut_seq<T, F>(data: &mut [T], chunk: usize, f: F)
where
    F: Fn(usize, &mut [T]),
{
    assert!(chunk > 0);
    data.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
}
