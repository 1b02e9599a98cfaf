use rayon::prelude::*;

/// Number of work items per block in ordered reductions. Fixed so that the
/// summation order never depends on the worker count.
pub(crate) const BLOCK: usize = 256;

/// Maps `f` over `0..count` in parallel and returns the results in index
/// order.
pub(crate) fn ordered_map<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..count).into_par_iter().map(f).collect()
}

/// Folds `0..count` in fixed-size blocks. Each block is folded sequentially
/// with `fold`, blocks run in parallel, and block results are merged in block
/// order with `merge`. The result is bit-identical for any thread count.
pub(crate) fn ordered_block_fold<A, Init, Fold, Merge>(
    count: usize,
    init: Init,
    fold: Fold,
    merge: Merge,
) -> A
where
    A: Send,
    Init: Fn() -> A + Sync + Send,
    Fold: Fn(&mut A, usize) + Sync + Send,
    Merge: Fn(&mut A, A),
{
    let blocks = count.div_ceil(BLOCK);
    let partials: Vec<A> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = init();
            for i in b * BLOCK..((b + 1) * BLOCK).min(count) {
                fold(&mut acc, i);
            }
            acc
        })
        .collect();
    let mut total = init();
    for p in partials {
        merge(&mut total, p);
    }
    total
}
