//! Deterministic data-parallel reductions.
//!
//! Every sum over grid nodes (or any other index range) is split into chunks
//! of a fixed size. Chunks are folded independently, possibly on different
//! threads, and the chunk partials are then combined by a pairwise tree in
//! chunk order. Chunk boundaries and the combination order never depend on
//! the number of workers, so results are bit-identical whether the
//! `parallel` feature is enabled, disabled, or run on a single thread.

/// Smallest number of indices folded sequentially inside one chunk.
pub const MIN_CHUNK: usize = 16;

/// Upper bound on the number of chunk partials held at once, in scalars.
const PARTIAL_SCALARS: usize = 1 << 21;

/// Chunk length for `len` items whose accumulator holds `acc_scalars` values.
///
/// Depends only on the problem size, never on the worker count.
pub fn chunk_len(len: usize, acc_scalars: usize) -> usize {
    let max_partials = (PARTIAL_SCALARS / acc_scalars.max(1)).clamp(1, 256);
    MIN_CHUNK.max(len.div_ceil(max_partials))
}

/// Whether the current call site would fan out across threads.
pub fn is_parallel() -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads() > 1
    }
    #[cfg(not(feature = "parallel"))]
    {
        false
    }
}

/// Folds `0..len` in fixed chunks and tree-combines the partials.
///
/// Returns `init()` when `len == 0`.
pub fn chunked_reduce<T, I, F, C>(len: usize, acc_scalars: usize, init: I, fold: F, combine: C) -> T
where
    T: Send,
    I: Fn() -> T + Sync,
    F: Fn(&mut T, usize) + Sync,
    C: Fn(T, T) -> T + Sync,
{
    if len == 0 {
        return init();
    }
    let chunk = chunk_len(len, acc_scalars);
    let n_chunks = len.div_ceil(chunk);
    let run_chunk = |c: usize| {
        let mut acc = init();
        let end = ((c + 1) * chunk).min(len);
        for i in c * chunk..end {
            fold(&mut acc, i);
        }
        acc
    };
    let partials = map_indexed(n_chunks, run_chunk);
    tree_combine(partials, &combine)
}

/// Evaluates `f(i)` for `i in 0..len`, preserving index order.
pub fn map_indexed<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    #[cfg(feature = "parallel")]
    {
        if is_parallel() {
            use rayon::prelude::*;
            return (0..len).into_par_iter().map(&f).collect();
        }
    }
    (0..len).map(f).collect()
}

/// Pairwise combination of `items` in index order: ((0,1),(2,3)),...
pub fn tree_combine<T, C>(mut items: Vec<T>, combine: &C) -> T
where
    C: Fn(T, T) -> T,
{
    assert!(!items.is_empty(), "tree_combine of empty list");
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut it = items.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(combine(a, b)),
                None => next.push(a),
            }
        }
        items = next;
    }
    items.pop().unwrap()
}

/// Runs `f` on a dedicated pool of `workers` threads (0 = rayon default).
///
/// Without the `parallel` feature this simply calls `f`.
pub fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        if workers == 0 {
            return f();
        }
        match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        f()
    }
}
