//! Parallel sweep evaluation.

use rayon::prelude::*;

use greenedge_core::tradeoff::{SweepPlan, SweepSurface};
use greenedge_core::TradeoffError;

/// Evaluates every cell of `plan` on `jobs` threads (0 picks the core count).
///
/// Results are collected by cell index, so the surface does not depend on
/// scheduling or on `jobs`.
pub fn evaluate(plan: &SweepPlan, jobs: usize) -> Result<SweepSurface, TradeoffError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("thread pool construction only fails on spawn errors");
    let cells = pool.install(|| {
        (0..plan.cell_count())
            .into_par_iter()
            .map(|k| {
                let (i, j) = plan.position(k);
                plan.cell(i, j)
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(plan.surface(cells))
}
