//! Quantitative plan metrics computed from rollout records.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use tacsim_core::sim::{EventKind, Outcome, RolloutRecord};
use tacsim_core::{CandidatePlan, EntityClass, Side};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricError {
    #[error("no rollout records to aggregate")]
    EmptyInput,
    #[error("plan has no planned trajectory for {0}")]
    MissingPlannedTrajectory(String),
    #[error("invalid metric weights: {0}")]
    InvalidWeights(String),
}

fn default_norm_x0() -> f64 {
    (260.0f64.hypot(160.0)) / 10.0
}

/// Weights of the cost and quality formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricWeights {
    /// Cost per plan-executing platform lost.
    pub eta1: f64,
    /// Cost per round of plan-executing ammunition spent.
    pub eta2: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    /// Displacement at which the normalized trajectory penalty reaches 0.5.
    #[serde(default = "default_norm_x0")]
    pub norm_x0: f64,
}

impl Default for MetricWeights {
    fn default() -> Self {
        MetricWeights { eta1: 1.0, eta2: 0.1, lambda1: 1.0, lambda2: 0.2, lambda3: 0.1, norm_x0: default_norm_x0() }
    }
}

impl MetricWeights {
    pub fn check(&self) -> Result<(), MetricError> {
        let all = [self.eta1, self.eta2, self.lambda1, self.lambda2, self.lambda3, self.norm_x0];
        if all.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(MetricError::InvalidWeights("weights must be finite and non-negative".into()));
        }
        if self.lambda1 <= 0.0 {
            return Err(MetricError::InvalidWeights("lambda1 must be positive".into()));
        }
        if self.norm_x0 <= 0.0 {
            return Err(MetricError::InvalidWeights("norm_x0 must be positive".into()));
        }
        Ok(())
    }
}

fn non_empty(records: &[RolloutRecord]) -> Result<f64, MetricError> {
    if records.is_empty() {
        Err(MetricError::EmptyInput)
    } else {
        Ok(records.len() as f64)
    }
}

/// Fraction of rollouts in which the core target was destroyed.
pub fn compute_msr(records: &[RolloutRecord]) -> Result<f64, MetricError> {
    let n = non_empty(records)?;
    Ok(records.iter().filter(|r| r.outcome == Outcome::Success).count() as f64 / n)
}

/// Mean weighted cost of lost platforms and spent ammunition on the
/// plan-executing side.
pub fn compute_cla(records: &[RolloutRecord], w: &MetricWeights) -> Result<f64, MetricError> {
    let n = non_empty(records)?;
    let total: f64 = records
        .iter()
        .map(|r| w.eta1 * r.entities_lost.plan_executing as f64 + w.eta2 * r.ammo_spent.plan_executing as f64)
        .sum();
    Ok(total / n)
}

/// Displacement between simulated and planned trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Displacement {
    /// Mean over every recorded tick of every plan-executing entity.
    pub ade: f64,
    /// Mean over records and entities at each record's final tick.
    pub fde: f64,
}

/// Simulated-vs-planned displacement. Every record contributes each of its
/// recorded ticks, so rollouts that end early weigh less in the average.
/// A dead entity's track stays at its final position; planned trajectories
/// shorter than a rollout are held at their last point.
pub fn compute_ade(records: &[RolloutRecord], plan: &CandidatePlan) -> Result<Displacement, MetricError> {
    non_empty(records)?;
    let (mut sum, mut count) = (0.0, 0usize);
    let (mut final_sum, mut final_count) = (0.0, 0usize);
    for r in records {
        for track in r.tracks.iter().filter(|t| t.side == Side::PlanExecuting) {
            let planned = plan
                .planned_trajectories
                .get(&track.entity_id)
                .filter(|p| !p.is_empty())
                .ok_or_else(|| MetricError::MissingPlannedTrajectory(track.entity_id.clone()))?;
            let at = |k: usize| planned[k.min(planned.len() - 1)];
            for (k, sim) in track.positions.iter().enumerate() {
                sum += sim.dist(at(k));
                count += 1;
            }
            if let Some(last) = track.positions.last() {
                final_sum += last.dist(at(track.positions.len() - 1));
                final_count += 1;
            }
        }
    }
    let mean = |s: f64, c: usize| if c == 0 { 0.0 } else { s / c as f64 };
    Ok(Displacement { ade: mean(sum, count), fde: mean(final_sum, final_count) })
}

/// Bounded, monotone normalization of a displacement: x / (x + x0).
pub fn phi_norm(x: f64, x0: f64) -> f64 {
    x / (x + x0)
}

/// Plan quality score: success minus weighted cost minus normalized
/// trajectory deviation.
pub fn compute_pqs(msr: f64, cla: f64, ade: f64, w: &MetricWeights) -> f64 {
    w.lambda1 * msr - w.lambda2 * cla - w.lambda3 * phi_norm(ade, w.norm_x0)
}

/// Overall (mean) and robust (worst-case) success over the two difficulty
/// levels.
pub fn success_aggregates(easy_msr: f64, difficult_msr: f64) -> (f64, f64) {
    ((easy_msr + difficult_msr) / 2.0, easy_msr.min(difficult_msr))
}

/// Outcome-level suppression: how often the opponent prevented success.
pub fn suppression_rate_outcome(msr: f64) -> f64 {
    1.0 - msr
}

/// Fire tally for one side.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FireTally {
    pub fired: u64,
    pub hits: u64,
}

impl FireTally {
    /// Hits per shot, absent when nothing was fired.
    pub fn rate(&self) -> Option<f64> {
        (self.fired > 0).then(|| self.hits as f64 / self.fired as f64)
    }
}

/// Event-log statistics, averaged per rollout unless noted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessMetrics {
    pub n_records: usize,
    /// Plan-executing platforms lost.
    pub avg_platform_attrition: f64,
    /// Lost platforms as a fraction of the plan-executing side.
    pub attrition_fraction: f64,
    pub avg_opponent_fire_hits: f64,
    pub avg_opponent_fire_fired: f64,
    /// Strike shots of the plan-executing side (suppression fire excluded).
    pub missiles_launched: f64,
    pub missile_hits: f64,
    pub missile_misses: f64,
    /// Mean core-target kill time over successful rollouts; absent when none succeeded.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ttk_mean: Option<f64>,
    /// Totals over all records, including suppression fire.
    pub opponent_fire: FireTally,
    pub plan_executing_fire: FireTally,
    /// Opponent hits per opponent shot over all records.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sr_process_opponent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sr_process_plan_executing: Option<f64>,
}

pub fn process_metrics(records: &[RolloutRecord]) -> Result<ProcessMetrics, MetricError> {
    let n = non_empty(records)?;
    let mut opp = FireTally::default();
    let mut blue = FireTally::default();
    let (mut launched, mut hits, mut misses) = (0u64, 0u64, 0u64);
    let (mut lost, mut fraction) = (0.0, 0.0);
    let mut kill_times = Vec::new();
    for r in records {
        let sides: BTreeMap<&str, Side> = r.tracks.iter().map(|t| (t.entity_id.as_str(), t.side)).collect();
        let core: Vec<&str> =
            r.tracks.iter().filter(|t| t.class == EntityClass::CommandCenter).map(|t| t.entity_id.as_str()).collect();
        // Hit and Miss events directly follow the Fire event they resolve.
        let mut strike = false;
        for e in &r.events {
            let side = sides.get(e.actor_id.as_str()).copied();
            match (e.kind, side) {
                (EventKind::Fire, Some(Side::Opponent)) => opp.fired += 1,
                (EventKind::Hit, Some(Side::Opponent)) => opp.hits += 1,
                (EventKind::Fire, Some(Side::PlanExecuting)) => {
                    blue.fired += 1;
                    strike = e.payload.soft_kill != Some(true);
                    launched += strike as u64;
                }
                (EventKind::Hit, Some(Side::PlanExecuting)) => {
                    blue.hits += 1;
                    hits += strike as u64;
                }
                (EventKind::Miss, Some(Side::PlanExecuting)) => misses += strike as u64,
                _ => {}
            }
        }
        lost += r.entities_lost.plan_executing as f64;
        if r.initial_counts.plan_executing > 0 {
            fraction += r.entities_lost.plan_executing as f64 / r.initial_counts.plan_executing as f64;
        }
        if r.outcome == Outcome::Success {
            if let Some(t) = core.iter().find_map(|id| r.kill_time(id)) {
                kill_times.push(t);
            }
        }
    }
    let ttk_mean = (!kill_times.is_empty()).then(|| kill_times.iter().sum::<f64>() / kill_times.len() as f64);
    Ok(ProcessMetrics {
        n_records: records.len(),
        avg_platform_attrition: lost / n,
        attrition_fraction: fraction / n,
        avg_opponent_fire_hits: opp.hits as f64 / n,
        avg_opponent_fire_fired: opp.fired as f64 / n,
        missiles_launched: launched as f64 / n,
        missile_hits: hits as f64 / n,
        missile_misses: misses as f64 / n,
        ttk_mean,
        opponent_fire: opp,
        plan_executing_fire: blue,
        sr_process_opponent: opp.rate(),
        sr_process_plan_executing: blue.rate(),
    })
}

/// Spearman rank correlation of two rankings of the same items (1 = best).
/// `None` for fewer than two items.
pub fn rank_correlation(a: &[usize], b: &[usize]) -> Option<f64> {
    let n = a.len();
    if n < 2 || b.len() != n {
        return None;
    }
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (*x as f64 - *y as f64).powi(2)).sum();
    let n = n as f64;
    Some(1.0 - 6.0 * d2 / (n * (n * n - 1.0)))
}
