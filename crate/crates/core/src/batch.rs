//! Batch execution of independent runs.
//!
//! A single run is a sequential loop by construction, but runs share nothing
//! besides read-only configuration, so sweeps over seeds, estimators, or
//! parameters are embarrassingly parallel. With the `parallel` feature
//! (enabled by default) batches fan out across a rayon pool; without it the
//! same API degrades to a plain sequential loop. Results keep the job order
//! and are bit-identical either way.

use crate::error::Result;
use crate::simulation::{simulate_run, SimConfig, SimTrace, TrajectoryPlan};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// One independent run: a configuration and the plan it executes.
#[derive(Debug, Clone)]
pub struct BatchJob {
    pub config: SimConfig,
    pub plan: TrajectoryPlan,
}

impl BatchJob {
    pub fn new(config: SimConfig, plan: TrajectoryPlan) -> Self {
        BatchJob { config, plan }
    }
}

/// Runs every job and collects the traces in job order.
pub fn run_batch(jobs: &[BatchJob]) -> Result<Vec<SimTrace>> {
    #[cfg(feature = "parallel")]
    {
        jobs.par_iter()
            .map(|job| simulate_run(&job.config, &job.plan))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_batch_sequential(jobs)
    }
}

/// Single-threaded reference path for [`run_batch`]; also the fallback used
/// when the `parallel` feature is disabled.
pub fn run_batch_sequential(jobs: &[BatchJob]) -> Result<Vec<SimTrace>> {
    jobs.iter()
        .map(|job| simulate_run(&job.config, &job.plan))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seed_sweep(n: u64) -> Vec<BatchJob> {
        let plan = TrajectoryPlan::line(0.1, 1.0).unwrap();
        (0..n)
            .map(|seed| {
                BatchJob::new(
                    SimConfig {
                        rng_seed: seed,
                        ..SimConfig::default()
                    },
                    plan.clone(),
                )
            })
            .collect()
    }

    #[test]
    fn batch_matches_sequential_bit_for_bit() {
        let jobs = seed_sweep(8);
        let batched = run_batch(&jobs).unwrap();
        let sequential = run_batch_sequential(&jobs).unwrap();
        assert_eq!(batched, sequential);
    }

    #[test]
    fn batch_preserves_job_order() {
        let jobs = seed_sweep(6);
        let traces = run_batch(&jobs).unwrap();
        let singles: Vec<_> = jobs
            .iter()
            .map(|j| simulate_run(&j.config, &j.plan).unwrap())
            .collect();
        assert_eq!(traces, singles);
    }

    #[test]
    fn batch_propagates_the_first_error() {
        let mut jobs = seed_sweep(3);
        jobs[1].config.ts_s = -1.0;
        assert!(run_batch(&jobs).is_err());
        assert!(run_batch_sequential(&jobs).is_err());
    }
}
