//! The full candidate pipeline: routes, assessment, composition, then
//! validation with repair.

use crate::analyst::{analyst_assess, bomber_actions, draft_plan, AssessmentVector};
use crate::compose::{compose_route, v_global};
use crate::external::request_plan;
use crate::kinematics::planned_trajectories;
use crate::pathfinder::{direct_route, pathfinder_topk, RouteSkeleton};
use crate::repair::repair_loop;
use crate::{PlanError, PlannerConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use tacsim_core::{AtomicAction, CandidatePlan, EntityClass, Intent, Scenario, Side};

/// Pipeline stage removed for ablation runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ablation {
    /// One-shot generation without any stage.
    Single,
    /// Straight route instead of route search.
    NoPf,
    /// Assessments replaced by zeros.
    NoAn,
    /// Draft plans used without composition.
    NoPl,
}

impl Ablation {
    pub fn as_str(self) -> &'static str {
        match self {
            Ablation::Single => "single",
            Ablation::NoPf => "no_pf",
            Ablation::NoAn => "no_an",
            Ablation::NoPl => "no_pl",
        }
    }
}

impl std::str::FromStr for Ablation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "single" => Ok(Ablation::Single),
            "no_pf" => Ok(Ablation::NoPf),
            "no_an" => Ok(Ablation::NoAn),
            "no_pl" => Ok(Ablation::NoPl),
            other => Err(format!(
                "unknown ablation `{other}` (expected single, no_pf, no_an or no_pl)"
            )),
        }
    }
}

/// Baseline plan with no route search: every plan-executing entity heads
/// straight for the core target, and bombers launch from range entry.
pub fn naive_plan(
    intent: &Intent,
    scenario: &Scenario,
    cfg: &PlannerConfig,
) -> Result<CandidatePlan, PlanError> {
    let target = scenario
        .entity(&intent.core_target_id)
        .ok_or_else(|| PlanError::UnknownTarget(intent.core_target_id.clone()))?;
    let route = direct_route(intent, scenario, cfg)?;
    let mut actions = bomber_actions(&route, intent, scenario, cfg);
    for f in scenario
        .side(Side::PlanExecuting)
        .filter(|e| e.class != EntityClass::Bomber && e.is_alive())
    {
        actions.push(AtomicAction::move_to(
            &f.id,
            0.0,
            target.position,
            scenario.constraint_set.speed_limit_for(f),
        ));
    }
    actions.sort_by(|a, b| a.schedule_cmp(b));
    let planned_trajectories = planned_trajectories(&actions, scenario);
    let metadata = BTreeMap::from([
        ("generator".to_string(), "naive".to_string()),
        ("route_id".to_string(), route.route_id),
    ]);
    Ok(CandidatePlan {
        plan_id: "naive".into(),
        actions,
        planned_trajectories,
        metadata,
    })
}

fn variant_name(cfg: &PlannerConfig) -> &'static str {
    cfg.ablation.map_or("full", Ablation::as_str)
}

fn finish(
    mut plan: CandidatePlan,
    repairs: usize,
    plan_id: String,
    cfg: &PlannerConfig,
) -> CandidatePlan {
    plan.plan_id = plan_id;
    plan.metadata
        .insert("ablation".into(), variant_name(cfg).into());
    plan.metadata.insert("repairs".into(), repairs.to_string());
    plan
}

/// Up to `n` validated candidate plans for `intent`, best utility first.
///
/// Candidates that still violate a constraint after `cfg.r_max` repair
/// rounds are discarded. Plans carry their route id, utility, assessment
/// and repair count in `metadata`.
pub fn generate_candidates(
    intent: &Intent,
    scenario: &Scenario,
    n: usize,
    cfg: &PlannerConfig,
) -> Result<Vec<CandidatePlan>, PlanError> {
    let n = n.max(1);
    if scenario.entity(&intent.core_target_id).is_none() {
        return Err(PlanError::UnknownTarget(intent.core_target_id.clone()));
    }
    let scenario = &intent.constrain(scenario);
    let variant = variant_name(cfg);

    if cfg.ablation == Some(Ablation::Single) {
        let plan = match &cfg.plan_endpoint {
            Some(url) => {
                let mut p = request_plan(url, intent, scenario, cfg.plan_timeout_ms)?;
                p.metadata.insert("generator".into(), "external".into());
                p
            }
            None => naive_plan(intent, scenario, cfg)?,
        };
        let (plan, repairs) =
            repair_loop(plan, scenario, cfg.r_max).map_err(|e| PlanError::NoValidCandidate {
                reasons: vec![e.to_string()],
            })?;
        return Ok(vec![finish(plan, repairs, format!("{variant}-0"), cfg)]);
    }

    let routes: Vec<RouteSkeleton> = if cfg.ablation == Some(Ablation::NoPf) {
        vec![direct_route(intent, scenario, cfg)?]
    } else {
        let set = pathfinder_topk(intent, scenario, n, cfg)?;
        if set.unreachable {
            tracing::warn!(
                found = set.routes.len(),
                wanted = n,
                "route search ran out of distinct lattice paths"
            );
        }
        set.routes
    };
    let assessments: Vec<AssessmentVector> = if cfg.ablation == Some(Ablation::NoAn) {
        vec![AssessmentVector::zero(); routes.len()]
    } else {
        routes
            .par_iter()
            .map(|r| analyst_assess(r, intent, scenario, cfg.n_fast, cfg))
            .collect::<Result<_, _>>()?
    };

    let utilities: Vec<f64> = assessments
        .iter()
        .map(|a| v_global(a, intent, scenario))
        .collect();
    let mut order: Vec<usize> = (0..routes.len())
        .filter(|&i| utilities[i] >= cfg.v_floor)
        .collect();
    if order.is_empty() {
        return Err(PlanError::NoFeasibleRoute);
    }
    order.sort_by(|&a, &b| utilities[b].total_cmp(&utilities[a]));

    let mut out = Vec::new();
    let mut reasons = Vec::new();
    for i in order {
        let (route, a) = (&routes[i], &assessments[i]);
        let draft = if cfg.ablation == Some(Ablation::NoPl) {
            draft_plan(route, intent, scenario, cfg)?
        } else {
            compose_route(route, intent, scenario, cfg)?
        };
        match repair_loop(draft, scenario, cfg.r_max) {
            Ok((mut plan, repairs)) => {
                for (k, v) in [
                    ("route_id", route.route_id.clone()),
                    ("route_score", route.score.to_string()),
                    ("v_global", utilities[i].to_string()),
                    ("exp_success", a.exp_success.to_string()),
                    ("exp_loss", a.exp_loss.to_string()),
                    ("exp_time", a.exp_time.to_string()),
                ] {
                    plan.metadata.insert(k.into(), v);
                }
                let id = format!("{variant}-{}", out.len());
                out.push(finish(plan, repairs, id, cfg));
            }
            Err(e) => {
                tracing::info!(route = %route.route_id, "candidate discarded: {e}");
                reasons.push(format!("{}: {e}", route.route_id));
            }
        }
        if out.len() == n {
            break;
        }
    }
    if out.is_empty() {
        return Err(PlanError::NoValidCandidate { reasons });
    }
    Ok(out)
}
