//! Data-parallel building blocks with a sequential fallback.
//!
//! Every hot loop in the crate goes through these shims. With the default
//! `parallel` feature they dispatch to rayon; without it they compile to the
//! equivalent `std` iterators, so `--no-default-features` builds run fully
//! sequentially. Reductions are chunked on fixed boundaries and combined in
//! index order, so results are bit-identical regardless of thread scheduling.

#[allow(unused_imports)]
pub(crate) mod prelude {
    #[cfg(feature = "parallel")]
    pub use rayon::prelude::*;
}

#[allow(unused_imports)]
use prelude::*;

/// Chunk size used for deterministic reductions.
const REDUCE_CHUNK: usize = 4096;

#[cfg(feature = "parallel")]
pub(crate) fn chunks_mut<T: Send>(v: &mut [T], size: usize) -> rayon::slice::ChunksMut<'_, T> {
    v.par_chunks_mut(size)
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn chunks_mut<T>(v: &mut [T], size: usize) -> std::slice::ChunksMut<'_, T> {
    v.chunks_mut(size)
}

#[cfg(feature = "parallel")]
pub(crate) fn chunks<T: Sync>(v: &[T], size: usize) -> rayon::slice::Chunks<'_, T> {
    v.par_chunks(size)
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn chunks<T>(v: &[T], size: usize) -> std::slice::Chunks<'_, T> {
    v.chunks(size)
}

#[cfg(feature = "parallel")]
pub(crate) fn range(r: std::ops::Range<usize>) -> rayon::range::Iter<usize> {
    r.into_par_iter()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn range(r: std::ops::Range<usize>) -> std::ops::Range<usize> {
    r
}

/// Sum of a slice with a schedule-independent result.
pub(crate) fn sum(v: &[f64]) -> f64 {
    let partials: Vec<f64> = chunks(v, REDUCE_CHUNK)
        .map(|c| c.iter().sum::<f64>())
        .collect();
    partials.iter().sum()
}

/// Sum of `f(v[i])` with a schedule-independent result.
pub(crate) fn sum_by<F>(v: &[f64], f: F) -> f64
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    let partials: Vec<f64> = chunks(v, REDUCE_CHUNK)
        .map(|c| c.iter().map(|&x| f(x)).sum::<f64>())
        .collect();
    partials.iter().sum()
}

/// Dot product with a schedule-independent result.
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let partials: Vec<f64> = chunks(a, REDUCE_CHUNK)
        .enumerate()
        .map(|(k, ca)| {
            let cb = &b[k * REDUCE_CHUNK..k * REDUCE_CHUNK + ca.len()];
            ca.iter().zip(cb).map(|(x, y)| x * y).sum::<f64>()
        })
        .collect();
    partials.iter().sum()
}

/// Squared distance ‖a − b‖² with a schedule-independent result.
pub(crate) fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let partials: Vec<f64> = chunks(a, REDUCE_CHUNK)
        .enumerate()
        .map(|(k, ca)| {
            let cb = &b[k * REDUCE_CHUNK..k * REDUCE_CHUNK + ca.len()];
            ca.iter()
                .zip(cb)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
        })
        .collect();
    partials.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sums_match_sequential() {
        let v: Vec<f64> = (0..10_000).map(|i| (i as f64).sin()).collect();
        let seq: f64 = {
            let partials: Vec<f64> = v.chunks(REDUCE_CHUNK).map(|c| c.iter().sum()).collect();
            partials.iter().sum()
        };
        assert_eq!(sum(&v), seq);
        assert!((dot(&v, &v) - sum_by(&v, |x| x * x)).abs() < 1e-9);
    }

    #[test]
    fn dist_sq_basic() {
        let a = [1.0, 2.0, 3.0];
        let b = [1.0, 0.0, 6.0];
        assert_eq!(dist_sq(&a, &b), 4.0 + 9.0);
    }
}
