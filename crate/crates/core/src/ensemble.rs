//! Deterministic parallel ensemble execution. Trajectories are grouped into
//! fixed-size batches keyed by trajectory index; batches run on the rayon
//! pool and their accumulators merge in batch order, so the result is
//! bitwise identical for any worker count.

use rayon::prelude::*;

/// Fold `step` over trajectory indices 0..n into per-batch accumulators
/// created by `make`, merging in index order.
pub fn parallel_fold<A, E, Make, Step, Merge>(
    n: u64,
    batch: u64,
    make: Make,
    step: Step,
    merge: Merge,
) -> Result<A, E>
where
    A: Send,
    E: Send,
    Make: Fn() -> A + Sync,
    Step: Fn(&mut A, u64) -> Result<(), E> + Sync,
    Merge: Fn(&mut A, &A),
{
    let batch = batch.max(1);
    let n_batches = n.div_ceil(batch);
    let results: Result<Vec<A>, E> = (0..n_batches)
        .into_par_iter()
        .map(|bi| {
            let mut acc = make();
            let lo = bi * batch;
            let hi = ((bi + 1) * batch).min(n);
            for idx in lo..hi {
                step(&mut acc, idx)?;
            }
            Ok(acc)
        })
        .collect();
    let mut results = results?.into_iter();
    let mut total = results.next().unwrap_or_else(&make);
    for acc in results {
        merge(&mut total, &acc);
    }
    Ok(total)
}
