//! Batch solving across independent instances.
//!
//! Every solve is single-threaded and owns its diagram, master model, and
//! engine state, so jobs share nothing. The batch layer fans them out over
//! a thread pool when the `parallel` feature is on and degrades to a plain
//! loop otherwise; per-job seeding makes the two orderings produce
//! identical results.

use crate::domain::{Payload, PricingInstance, SolveResult};
use crate::driver::{self, MethodConfig};
use crate::error::Result;

/// One unit of batch work.
#[derive(Debug, Clone)]
pub struct BatchJob {
    pub instance: PricingInstance,
    pub config: MethodConfig,
}

fn solve_job(job: &BatchJob) -> Result<SolveResult> {
    match job.instance.payload {
        Payload::Interdiction(_) => driver::solve_kip(&job.instance, &job.config),
        _ => driver::solve_cpp(&job.instance, &job.config),
    }
}

/// Runs every job, carrying per-job errors instead of short-circuiting so
/// one bad instance cannot sink a sweep. Output order matches input order.
#[cfg(feature = "parallel")]
pub fn run_batch(jobs: &[BatchJob]) -> Vec<Result<SolveResult>> {
    use rayon::prelude::*;
    jobs.par_iter().map(solve_job).collect()
}

/// Runs every job, carrying per-job errors instead of short-circuiting so
/// one bad instance cannot sink a sweep. Output order matches input order.
#[cfg(not(feature = "parallel"))]
pub fn run_batch(jobs: &[BatchJob]) -> Vec<Result<SolveResult>> {
    run_batch_serial(jobs)
}

/// Single-threaded batch run; the reference ordering for determinism
/// checks and the body behind [`run_batch`] without the `parallel` feature.
pub fn run_batch_serial(jobs: &[BatchJob]) -> Vec<Result<SolveResult>> {
    jobs.iter().map(solve_job).collect()
}
