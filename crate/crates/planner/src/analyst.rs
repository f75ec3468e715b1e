//! Fast Monte-Carlo assessment of a route with a bomber-only draft plan.

use crate::kinematics::{planned_trajectories, route_actions};
use crate::pathfinder::RouteSkeleton;
use crate::validator::launch_limit;
use crate::{PlanError, PlannerConfig};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use tacsim_core::geom::{densify, Vec2};
use tacsim_core::opponents::NoBrain;
use tacsim_core::sim::{run_rollout, Outcome, SeedInfo};
use tacsim_core::{AtomicAction, CandidatePlan, EntityClass, Intent, Scenario, Side};

/// Sample means over the assessment rollouts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssessmentVector {
    pub exp_success: f64,
    /// Plan-executing entities lost.
    pub exp_loss: f64,
    /// Seconds until the rollout ended.
    pub exp_time: f64,
    pub n_fast: usize,
}

impl AssessmentVector {
    pub fn zero() -> Self {
        AssessmentVector {
            exp_success: 0.0,
            exp_loss: 0.0,
            exp_time: 0.0,
            n_fast: 0,
        }
    }
}

/// Polyline from `start` along the route's interior waypoints, cut at the
/// first point within `hold` of `target`.
pub(crate) fn strike_waypoints(
    route: &RouteSkeleton,
    start: Vec2,
    target: Vec2,
    hold: f64,
) -> Vec<Vec2> {
    let mut line = vec![start];
    line.extend(route.waypoints.iter().skip(1).copied());
    if start.dist(target) <= hold {
        return vec![start];
    }
    let mut out = vec![start];
    for seg in line.windows(2) {
        let pts = densify(seg, 0.25);
        if let Some(p) = pts.iter().find(|p| p.dist(target) <= hold) {
            out.push(*p);
            return out;
        }
        out.push(seg[1]);
    }
    out
}

/// Bombers fly the route and stop at the hold point. The first launch goes
/// out on the first tick in range, then one per firing interval until the
/// launch budget or plan duration runs out.
pub(crate) fn bomber_actions(
    route: &RouteSkeleton,
    intent: &Intent,
    scenario: &Scenario,
    cfg: &PlannerConfig,
) -> Vec<AtomicAction> {
    let target = scenario
        .entity(&intent.core_target_id)
        .expect("intent target checked by caller")
        .position;
    let mut actions = Vec::new();
    for b in scenario
        .side(Side::PlanExecuting)
        .filter(|e| e.class == EntityClass::Bomber && e.is_alive())
    {
        let Some(limit) = launch_limit(scenario, &b.id) else {
            continue;
        };
        let speed = scenario.constraint_set.speed_limit_for(b);
        let path = strike_waypoints(route, b.position, target, cfg.hold_fraction * limit);
        actions.extend(route_actions(&b.id, b.position, &path[1..], speed, 0, scenario).actions);
    }
    let traj = planned_trajectories(&actions, scenario);
    schedule_launches(&mut actions, &traj, intent, scenario);
    actions.sort_by(|a, b| a.schedule_cmp(b));
    actions
}

fn schedule_launches(
    actions: &mut Vec<AtomicAction>,
    traj: &BTreeMap<String, Vec<Vec2>>,
    intent: &Intent,
    scenario: &Scenario,
) {
    let sim = &scenario.sim_config;
    let target = scenario
        .entity(&intent.core_target_id)
        .expect("intent target checked by caller");
    let last_tick = sim
        .tick_of(scenario.constraint_set.max_duration(sim))
        .min(sim.horizon_ticks());
    let cap = scenario.constraint_set.max_salvo_per_tick as usize;
    let mut per_tick: BTreeMap<u64, usize> = BTreeMap::new();
    for b in scenario
        .side(Side::PlanExecuting)
        .filter(|e| e.class == EntityClass::Bomber && e.is_alive())
    {
        let (Some(w), Some(limit), Some(points)) = (
            b.weapon.as_ref(),
            launch_limit(scenario, &b.id),
            traj.get(&b.id),
        ) else {
            continue;
        };
        let interval = (w.rof_base / sim.dt - 1e-9).ceil().max(1.0) as u64;
        let budget = scenario.constraint_set.ammo_budget_for(b) as usize;
        let Some(first) =
            (0..=last_tick).find(|&k| points[k as usize].dist(target.position) <= limit)
        else {
            continue;
        };
        let mut tick = first.max(1);
        let mut placed = 0;
        while placed < budget && tick <= last_tick {
            if per_tick.get(&tick).copied().unwrap_or(0) < cap
                && points[tick as usize].dist(target.position) <= limit
            {
                *per_tick.entry(tick).or_default() += 1;
                actions.push(AtomicAction::launch(
                    &b.id,
                    sim.time_of(tick),
                    &w.name,
                    &target.id,
                ));
                placed += 1;
                tick += interval;
            } else {
                tick += 1;
            }
        }
    }
}

/// The route-following, bombers-only plan used for assessment.
pub fn draft_plan(
    route: &RouteSkeleton,
    intent: &Intent,
    scenario: &Scenario,
    cfg: &PlannerConfig,
) -> Result<CandidatePlan, PlanError> {
    if scenario.entity(&intent.core_target_id).is_none() {
        return Err(PlanError::UnknownTarget(intent.core_target_id.clone()));
    }
    let actions = bomber_actions(route, intent, scenario, cfg);
    let planned_trajectories = planned_trajectories(&actions, scenario);
    let metadata = BTreeMap::from([
        ("generator".to_string(), "draft".to_string()),
        ("route_id".to_string(), route.route_id.clone()),
    ]);
    Ok(CandidatePlan {
        plan_id: format!("draft-{}", route.route_id),
        actions,
        planned_trajectories,
        metadata,
    })
}

/// Run the draft plan of `route` against the scripted opponent on seeds
/// `1..=n_fast` and average success, losses and duration.
pub fn analyst_assess(
    route: &RouteSkeleton,
    intent: &Intent,
    scenario: &Scenario,
    n_fast: usize,
    cfg: &PlannerConfig,
) -> Result<AssessmentVector, PlanError> {
    let n_fast = n_fast.max(1);
    let plan = draft_plan(route, intent, scenario, cfg)?;
    let (mut success, mut loss, mut time) = (0.0, 0.0, 0.0);
    for seed in 1..=n_fast as u64 {
        let r = run_rollout(scenario, &plan, &mut NoBrain, SeedInfo::from_seed(seed))
            .map_err(|e| PlanError::Rollout(e.to_string()))?;
        if r.outcome == Outcome::Success {
            success += 1.0;
        }
        loss += r.entities_lost.plan_executing as f64;
        time += r.end_time();
    }
    let n = n_fast as f64;
    Ok(AssessmentVector {
        exp_success: success / n,
        exp_loss: loss / n,
        exp_time: time / n,
        n_fast,
    })
}
