//! Monte-Carlo verification of candidate plans: seeded rollouts, metrics,
//! static scoring, ranked reports, trajectory plots and prediction
//! datasets.

pub mod dataset;
#[cfg(test)]
mod fixtures;
pub mod harness;
pub mod metrics;
pub mod plot;
pub mod report;
pub mod rubric;

pub use harness::{monte_carlo_verify, SeedFault, VerifyError, VerifyRun};
pub use metrics::{
    compute_ade, compute_cla, compute_msr, compute_pqs, process_metrics, success_aggregates, suppression_rate_outcome, Displacement,
    MetricError, MetricWeights, ProcessMetrics,
};
pub use report::{rank_and_report, PlanReport, ReportConfig, VerificationReport};
pub use rubric::{static_score, RubricWeights, StaticScore};
