//! Verification of a set of plans and the resulting ranked report.

use crate::harness::{monte_carlo_verify, SeedFault, VerifyError};
use crate::metrics::{
    compute_ade, compute_cla, compute_msr, compute_pqs, process_metrics, rank_correlation, success_aggregates,
    suppression_rate_outcome, MetricWeights, ProcessMetrics,
};
use crate::rubric::{static_score, RubricWeights, StaticScore};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use tacsim_core::opponents::OpponentConfig;
use tacsim_core::scenario::Difficulty;
use tacsim_core::sim::RolloutRecord;
use tacsim_core::{CandidatePlan, Scenario};

/// Success of one plan on one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub scenario: String,
    pub difficulty: Difficulty,
    pub digest: String,
    pub msr: f64,
    pub n_rollouts: usize,
}

/// Metrics of one plan pooled over every scenario and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanReport {
    pub plan_id: String,
    pub plan_digest: String,
    /// Position by quality score, 1 = best.
    pub rank: usize,
    /// Position by static rubric total, 1 = best.
    pub static_rank: usize,
    pub msr: f64,
    pub cla: f64,
    pub ade: f64,
    pub fde: f64,
    pub pqs: f64,
    pub suppression_rate_outcome: f64,
    /// Opponent hits per opponent shot.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sr_process: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub overall_success: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub robust_success: Option<f64>,
    pub process: ProcessMetrics,
    pub static_score: StaticScore,
    pub per_scenario: Vec<ScenarioResult>,
    pub faults: Vec<SeedFault>,
    /// Event-log hash of every completed rollout, keyed "scenario/seed".
    pub log_hashes: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    /// Opponent policy name.
    pub validator: String,
    pub opponent: OpponentConfig,
    pub seeds: Vec<u64>,
    pub scenario_digests: BTreeMap<String, String>,
    pub weights: MetricWeights,
    pub rubric_weights: RubricWeights,
    /// Sorted by rank.
    pub plans: Vec<PlanReport>,
    /// Spearman correlation between static and simulation ranks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub static_sim_rank_correlation: Option<f64>,
}

/// Settings shared by every plan in a report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportConfig {
    pub opponent: OpponentConfig,
    pub seeds: Vec<u64>,
    pub weights: MetricWeights,
    pub rubric_weights: RubricWeights,
    pub workers: usize,
}

/// Pool per-scenario rollouts of one plan into a plan report (ranks unset).
pub fn summarize_plan(
    plan: &CandidatePlan,
    runs: &[(&Scenario, Vec<RolloutRecord>, Vec<SeedFault>)],
    static_score: StaticScore,
    weights: &MetricWeights,
) -> Result<PlanReport, VerifyError> {
    let all: Vec<RolloutRecord> = runs.iter().flat_map(|(_, r, _)| r.iter().cloned()).collect();
    if all.is_empty() {
        let faults = runs.iter().map(|(_, _, f)| f.len()).sum();
        return Err(VerifyError::NoCompletedRollouts { faults });
    }
    let msr = compute_msr(&all)?;
    let cla = compute_cla(&all, weights)?;
    let disp = compute_ade(&all, plan)?;
    let process = process_metrics(&all)?;
    let per_scenario: Vec<ScenarioResult> = runs
        .iter()
        .filter(|(_, r, _)| !r.is_empty())
        .map(|(s, r, _)| {
            Ok(ScenarioResult { scenario: s.name.clone(), difficulty: s.difficulty, digest: s.digest(), msr: compute_msr(r)?, n_rollouts: r.len() })
        })
        .collect::<Result<_, VerifyError>>()?;
    let by_difficulty = |d: Difficulty| {
        let recs: Vec<RolloutRecord> = runs.iter().filter(|(s, _, _)| s.difficulty == d).flat_map(|(_, r, _)| r.iter().cloned()).collect();
        compute_msr(&recs).ok()
    };
    let (overall_success, robust_success) = match (by_difficulty(Difficulty::Easy), by_difficulty(Difficulty::Difficult)) {
        (Some(e), Some(d)) => {
            let (o, r) = success_aggregates(e, d);
            (Some(o), Some(r))
        }
        _ => (None, None),
    };
    let mut log_hashes = BTreeMap::new();
    for (s, records, _) in runs {
        for r in records {
            log_hashes.insert(format!("{}/{}", s.name, r.seed.base_seed), r.log_hash.clone());
        }
    }
    Ok(PlanReport {
        plan_id: plan.plan_id.clone(),
        plan_digest: plan.digest(),
        rank: 0,
        static_rank: 0,
        msr,
        cla,
        ade: disp.ade,
        fde: disp.fde,
        pqs: compute_pqs(msr, cla, disp.ade, weights),
        suppression_rate_outcome: suppression_rate_outcome(msr),
        sr_process: process.sr_process_opponent,
        overall_success,
        robust_success,
        process,
        static_score,
        per_scenario,
        faults: runs.iter().flat_map(|(_, _, f)| f.iter().cloned()).collect(),
        log_hashes,
    })
}

/// Assign simulation ranks (quality score descending) and static ranks
/// (rubric total descending), ties by plan id, and sort by simulation rank.
pub fn assign_ranks(plans: &mut [PlanReport]) {
    plans.sort_by(|a, b| b.static_score.total.total_cmp(&a.static_score.total).then_with(|| a.plan_id.cmp(&b.plan_id)));
    for (i, p) in plans.iter_mut().enumerate() {
        p.static_rank = i + 1;
    }
    plans.sort_by(|a, b| b.pqs.total_cmp(&a.pqs).then_with(|| a.plan_id.cmp(&b.plan_id)));
    for (i, p) in plans.iter_mut().enumerate() {
        p.rank = i + 1;
    }
}

/// Verify every plan on every scenario with every seed, then rank.
/// The static rubric is evaluated on the first scenario.
pub fn rank_and_report(plans: &[CandidatePlan], scenarios: &[Scenario], config: &ReportConfig) -> Result<VerificationReport, VerifyError> {
    config.weights.check()?;
    let first = scenarios.first().ok_or(VerifyError::NoScenarios)?;
    let mut reports = Vec::new();
    for plan in plans {
        let mut runs = Vec::new();
        for s in scenarios {
            let run = monte_carlo_verify(plan, s, &config.opponent, &config.seeds, config.workers)?;
            runs.push((s, run.records, run.faults));
        }
        let score = static_score(plan, first, &config.rubric_weights);
        reports.push(summarize_plan(plan, &runs, score, &config.weights)?);
    }
    Ok(assemble(reports, scenarios, config))
}

/// Wrap ranked plan reports with the run settings.
pub fn assemble(mut reports: Vec<PlanReport>, scenarios: &[Scenario], config: &ReportConfig) -> VerificationReport {
    assign_ranks(&mut reports);
    let sim: Vec<usize> = reports.iter().map(|p| p.rank).collect();
    let stat: Vec<usize> = reports.iter().map(|p| p.static_rank).collect();
    VerificationReport {
        validator: config.opponent.name().to_string(),
        opponent: config.opponent.clone(),
        seeds: config.seeds.clone(),
        scenario_digests: scenarios.iter().map(|s| (s.name.clone(), s.digest())).collect(),
        weights: config.weights,
        rubric_weights: config.rubric_weights,
        static_sim_rank_correlation: rank_correlation(&stat, &sim),
        plans: reports,
    }
}

fn pct(x: Option<f64>) -> String {
    x.map_or("-".into(), |v| format!("{:.2}", v * 100.0))
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is always serializable")
    }

    /// Plain-text tables: the ranking with the main metrics, then process
    /// metrics, then static versus simulation rank.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "Validator: {}", self.validator);
        let _ = writeln!(out, "Seeds: {} ({}..{})", self.seeds.len(), self.seeds.first().unwrap_or(&0), self.seeds.last().unwrap_or(&0));
        for (name, digest) in &self.scenario_digests {
            let _ = writeln!(out, "Scenario {name}: {digest}");
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "{:<5} {:<16} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}", "Rank", "Plan", "PQS", "MSR %", "CLA", "ADE", "FDE", "Overall", "Robust");
        for p in &self.plans {
            let _ = writeln!(
                out,
                "{:<5} {:<16} {:>8.4} {:>8.2} {:>8.3} {:>8.3} {:>8.3} {:>8} {:>8}",
                p.rank,
                p.plan_id,
                p.pqs,
                p.msr * 100.0,
                p.cla,
                p.ade,
                p.fde,
                pct(p.overall_success),
                pct(p.robust_success)
            );
        }
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:<16} {:>8} {:>8} {:>9} {:>9} {:>9} {:>8} {:>8} {:>8} {:>8}",
            "Plan", "Supp. %", "SR proc", "Attrition", "Opp hits", "Opp fired", "TTK (s)", "Launched", "Hits", "Misses"
        );
        for p in &self.plans {
            let m = &p.process;
            let _ = writeln!(
                out,
                "{:<16} {:>8.2} {:>8} {:>9.3} {:>9.3} {:>9.3} {:>8} {:>8.3} {:>8.3} {:>8.3}",
                p.plan_id,
                p.suppression_rate_outcome * 100.0,
                p.sr_process.map_or("-".into(), |v| format!("{v:.3}")),
                m.avg_platform_attrition,
                m.avg_opponent_fire_hits,
                m.avg_opponent_fire_fired,
                m.ttk_mean.map_or("-".into(), |v| format!("{v:.2}")),
                m.missiles_launched,
                m.missile_hits,
                m.missile_misses
            );
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "{:<16} {:>11} {:>9} {:>12}", "Plan", "Static Rank", "Sim. Rank", "Static total");
        let mut by_id: Vec<&PlanReport> = self.plans.iter().collect();
        by_id.sort_by(|a, b| a.plan_id.cmp(&b.plan_id));
        for p in by_id {
            let _ = writeln!(out, "{:<16} {:>11} {:>9} {:>12.2}", p.plan_id, p.static_rank, p.rank, p.static_score.total);
        }
        if let Some(rho) = self.static_sim_rank_correlation {
            let _ = writeln!(out, "Rank correlation (static vs simulation): {rho:.4}");
        }
        out
    }
}
