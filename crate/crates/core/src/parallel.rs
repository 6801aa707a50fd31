//! Trial-level parallelism with a fixed reduction order.
//!
//! Trials are grouped into fixed-size chunks. Each chunk folds its trials in
//! index order into a private accumulator; chunk accumulators are merged in
//! chunk order. The result is bitwise identical for any thread-pool size.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::seed::SeedStream;

/// Trials per chunk. Changing this changes floating-point summation order
/// and therefore the last bits of every Monte-Carlo estimate.
pub const CHUNK_TRIALS: usize = 32;

/// Runs `trials` independent trials and reduces them deterministically.
///
/// `fold` receives the chunk accumulator, the trial index and that trial's
/// private RNG stream.
pub fn map_reduce<A, I, F, M>(trials: usize, seed: &SeedStream, init: I, fold: F, merge: M) -> Result<A>
where
    A: Send,
    I: Fn() -> A + Sync,
    F: Fn(&mut A, usize, &mut ChaCha8Rng) -> Result<()> + Sync,
    M: Fn(&mut A, A),
{
    let n_chunks = trials.div_ceil(CHUNK_TRIALS);
    let partials: Vec<A> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = init();
            let lo = c * CHUNK_TRIALS;
            let hi = (lo + CHUNK_TRIALS).min(trials);
            for t in lo..hi {
                let mut rng = seed.trial(t as u64);
                fold(&mut acc, t, &mut rng)?;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<A>>>()?;
    let mut out = init();
    for p in partials {
        merge(&mut out, p);
    }
    Ok(out)
}

/// Per-trial map whose results are returned in trial order.
pub fn map_trials<T, F>(trials: usize, seed: &SeedStream, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &mut ChaCha8Rng) -> Result<T> + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = seed.trial(t as u64);
            f(t, &mut rng)
        })
        .collect()
}

/// Element-wise `acc += other` for accumulator vectors.
pub fn add_assign(acc: &mut [f64], other: &[f64]) {
    for (a, b) in acc.iter_mut().zip(other) {
        *a += b;
    }
}
