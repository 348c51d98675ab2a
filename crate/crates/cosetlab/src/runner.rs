//! Parallel trial runner.
//!
//! Trials are cut into contiguous chunks, one per worker. Each trial draws
//! from its own derived stream, so the totals are the same for any `jobs`.

use std::thread;

use cosetlab_core::games::{assemble, run_range, Experiment, GameResult};

/// Runs `trials` trials of `exp` on up to `jobs` threads.
pub fn run_parallel(exp: &dyn Experiment, trials: u64, seed: u64, jobs: usize) -> cosetlab_core::Result<GameResult> {
    exp.check()?;
    let jobs = jobs.max(1).min(trials.max(1) as usize) as u64;
    let chunk = trials.div_ceil(jobs);
    let parts: Vec<cosetlab_core::Result<(u64, u64)>> = thread::scope(|s| {
        let handles: Vec<_> = (0..jobs)
            .map(|j| {
                let start = (j * chunk).min(trials);
                let end = ((j + 1) * chunk).min(trials);
                s.spawn(move || run_range(exp, seed, start..end))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut wins = 0;
    let mut queries = 0;
    for p in parts {
        let (w, q) = p?;
        wins += w;
        queries += q;
    }
    Ok(assemble(exp, trials, seed, wins, queries))
}

/// Worker count from the environment, at least 1.
pub fn default_jobs() -> usize {
    thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}
