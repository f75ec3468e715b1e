//! Seeded Monte-Carlo rollouts of one plan.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tacsim_core::opponents::OpponentConfig;
use tacsim_core::sim::{run_rollout, RolloutError, RolloutRecord, SeedInfo};
use tacsim_core::{CandidatePlan, Scenario};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VerifyError {
    #[error("seed list is empty")]
    NoSeeds,
    #[error("no scenarios to verify on")]
    NoScenarios,
    #[error("cannot start worker pool: {0}")]
    WorkerPool(String),
    #[error("no rollout completed ({faults} opponent fault(s))")]
    NoCompletedRollouts { faults: usize },
    #[error(transparent)]
    Metric(#[from] crate::metrics::MetricError),
}

/// A rollout aborted by the opponent policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedFault {
    pub seed: u64,
    pub message: String,
}

/// Completed records in seed order plus the seeds whose rollout faulted.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyRun {
    pub records: Vec<RolloutRecord>,
    pub faults: Vec<SeedFault>,
}

/// Run a worker pool of `workers` threads (0 = one per core).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T, VerifyError> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().map_err(|e| VerifyError::WorkerPool(e.to_string()))?;
    Ok(pool.install(f))
}

/// One rollout per seed against a fresh opponent built from `opponent`.
/// Results do not depend on the number of workers.
pub fn monte_carlo_verify(
    plan: &CandidatePlan,
    scenario: &Scenario,
    opponent: &OpponentConfig,
    seeds: &[u64],
    workers: usize,
) -> Result<VerifyRun, VerifyError> {
    if seeds.is_empty() {
        return Err(VerifyError::NoSeeds);
    }
    let results: Vec<(u64, Result<RolloutRecord, RolloutError>)> = with_workers(workers, || {
        seeds
            .par_iter()
            .map(|&seed| {
                let mut policy = opponent.build();
                (seed, run_rollout(scenario, plan, policy.as_mut(), SeedInfo::from_seed(seed)))
            })
            .collect()
    })?;
    let mut run = VerifyRun { records: Vec::new(), faults: Vec::new() };
    for (seed, r) in results {
        match r {
            Ok(record) => run.records.push(record),
            Err(e) => {
                tracing::warn!(seed, "rollout aborted: {e}");
                run.faults.push(SeedFault { seed, message: e.to_string() });
            }
        }
    }
    Ok(run)
}
