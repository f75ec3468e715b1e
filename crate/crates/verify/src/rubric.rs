//! Static plan scoring from the plan text alone, without simulation.
//!
//! Each dimension is scored 1 (worst) to 5 (best) through a threshold table:
//!
//! | dimension         | statistic                                           | 5       | 4       | 3       | 2          | 1       |
//! |-------------------|-----------------------------------------------------|---------|---------|---------|------------|---------|
//! | smoothness        | mean total turning per moving entity (rad)          | <= pi/4 | <= pi/2 | <= pi   | <= 2pi     | more    |
//! | threat avoidance  | bomber exposure / straight-approach exposure        | <= 0.25 | <= 0.5  | <= 0.75 | <= 1.0     | more    |
//! | resource use      | planned launches / launch budget                    | <= 0.25 | <= 0.5  | <= 0.75 | < 1.0      | >= 1.0  |
//! | coordination      | share of air-defence range entries under suppression| 1.0     | >= 0.75 | >= 0.5  | > 0        | 0       |
//! | feasibility       | mean launch margin (limit - d) / limit              | >= 0.2  | >= 0.1  | >= 0.05 | valid      | invalid |
//!
//! A plan without moving entities scores 5 on smoothness; without bomber
//! exposure on the straight approach, 5 if its own exposure is also zero and
//! 1 otherwise; without range entries, 5 on coordination; a valid plan with
//! no launches scores 2 on feasibility.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use tacsim_core::geom::turn_angle;
use tacsim_core::plan::ActionKind;
use tacsim_core::{CandidatePlan, EntityClass, Scenario, Side, Vec2};
use tacsim_planner::validator::{launch_distance, launch_limit};
use tacsim_planner::{planned_trajectories, validator_check, ThreatField};

/// Relative weights of the five dimensions in the total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RubricWeights {
    pub smoothness: f64,
    pub threat_avoidance: f64,
    pub resource: f64,
    pub coordination: f64,
    pub feasibility: f64,
}

impl Default for RubricWeights {
    fn default() -> Self {
        RubricWeights { smoothness: 1.0, threat_avoidance: 1.0, resource: 1.0, coordination: 1.0, feasibility: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaticScore {
    pub smoothness: u8,
    pub threat_avoidance: u8,
    pub resource: u8,
    pub coordination: u8,
    pub feasibility: u8,
    pub total: f64,
}

/// Slack on threshold comparisons so sums that differ only by rounding land
/// on the same side of a threshold.
const EPS: f64 = 1e-9;

/// Score by the first threshold the value satisfies; 1 if none does.
fn lookup(value: f64, le: [f64; 4]) -> u8 {
    le.iter().position(|t| value <= *t + EPS).map_or(1, |i| 5 - i as u8)
}

pub fn smoothness_score(trajectories: &BTreeMap<String, Vec<Vec2>>) -> u8 {
    let mut turning = Vec::new();
    for points in trajectories.values() {
        let steps: Vec<Vec2> = points.windows(2).map(|w| w[1] - w[0]).filter(|d| d.norm() > 1e-9).collect();
        if steps.is_empty() {
            continue;
        }
        turning.push(steps.windows(2).map(|w| turn_angle(w[0], w[1])).sum::<f64>());
    }
    if turning.is_empty() {
        return 5;
    }
    lookup(turning.iter().sum::<f64>() / turning.len() as f64, [PI / 4.0, PI / 2.0, PI, 2.0 * PI])
}

fn bombers(scenario: &Scenario) -> impl Iterator<Item = &tacsim_core::EntityState> {
    scenario.side(Side::PlanExecuting).filter(|e| e.class == EntityClass::Bomber)
}

pub fn threat_avoidance_score(trajectories: &BTreeMap<String, Vec<Vec2>>, scenario: &Scenario) -> u8 {
    let field = ThreatField::from_scenario(scenario);
    let target = scenario.core_target().position;
    let (mut planned, mut straight) = (0.0, 0.0);
    for b in bombers(scenario) {
        if let Some(points) = trajectories.get(&b.id) {
            planned += field.exposure(points, 1.0);
        }
        let stop = launch_limit(scenario, &b.id).unwrap_or(0.0);
        let d = b.position.dist(target);
        if d > stop {
            let end = b.position.lerp(target, (d - stop) / d);
            straight += field.exposure(&[b.position, end], 1.0);
        }
    }
    if straight <= 0.0 {
        return if planned <= 0.0 { 5 } else { 1 };
    }
    lookup(planned / straight, [0.25, 0.5, 0.75, 1.0])
}

pub fn resource_score(plan: &CandidatePlan, scenario: &Scenario) -> u8 {
    let budget: u32 = scenario
        .side(Side::PlanExecuting)
        .filter(|e| e.class == EntityClass::Bomber || plan.actions.iter().any(|a| a.is_launch() && a.actor_id == e.id))
        .map(|e| scenario.constraint_set.ammo_budget_for(e))
        .sum();
    let launches = plan.actions.iter().filter(|a| a.is_launch()).count() as f64;
    if budget == 0 {
        return if launches == 0.0 { 5 } else { 1 };
    }
    let ratio = launches / budget as f64;
    if ratio >= 1.0 - EPS {
        1
    } else {
        lookup(ratio, [0.25, 0.5, 0.75, 1.0])
    }
}

pub fn coordination_score(plan: &CandidatePlan, trajectories: &BTreeMap<String, Vec<Vec2>>, scenario: &Scenario) -> u8 {
    let dt = scenario.sim_config.dt;
    let (mut entries, mut covered) = (0usize, 0usize);
    for threat in scenario.side(Side::Opponent).filter(|e| {
        e.is_alive() && matches!(e.class, EntityClass::AntiAirThreat | EntityClass::MissileThreatRegion)
    }) {
        let Some(w) = &threat.weapon else { continue };
        let entry = bombers(scenario)
            .filter_map(|b| trajectories.get(&b.id))
            .filter_map(|pts| pts.iter().position(|p| p.dist(threat.position) <= w.range))
            .min();
        let Some(entry) = entry else { continue };
        let t = entry as f64 * dt;
        entries += 1;
        let suppressed = plan.actions.iter().any(|a| match &a.kind {
            ActionKind::Suppress { target_id, duration } => {
                *target_id == threat.id && a.t_start <= t + 1e-9 && a.t_start + duration >= t - 1e-9
            }
            _ => false,
        });
        covered += suppressed as usize;
    }
    if entries == 0 {
        return 5;
    }
    let share = covered as f64 / entries as f64;
    match share {
        s if s >= 1.0 => 5,
        s if s >= 0.75 => 4,
        s if s >= 0.5 => 3,
        s if s > 0.0 => 2,
        _ => 1,
    }
}

pub fn feasibility_score(plan: &CandidatePlan, trajectories: &BTreeMap<String, Vec<Vec2>>, scenario: &Scenario) -> u8 {
    if !validator_check(plan, scenario).is_empty() {
        return 1;
    }
    let margins: Vec<f64> = plan
        .actions
        .iter()
        .filter_map(|a| match &a.kind {
            ActionKind::Launch { target_id, .. } => {
                let limit = launch_limit(scenario, &a.actor_id)?;
                let d = launch_distance(trajectories, scenario, &a.actor_id, target_id, a.t_start)?;
                (limit > 0.0).then(|| (limit - d) / limit)
            }
            _ => None,
        })
        .collect();
    if margins.is_empty() {
        return 2;
    }
    let mean = margins.iter().sum::<f64>() / margins.len() as f64;
    match mean {
        m if m >= 0.2 => 5,
        m if m >= 0.1 => 4,
        m if m >= 0.05 => 3,
        _ => 2,
    }
}

/// Rubric scores of `plan` with a weighted-mean total.
pub fn static_score(plan: &CandidatePlan, scenario: &Scenario, weights: &RubricWeights) -> StaticScore {
    let traj = planned_trajectories(&plan.actions, scenario);
    let s = [
        smoothness_score(&traj),
        threat_avoidance_score(&traj, scenario),
        resource_score(plan, scenario),
        coordination_score(plan, &traj, scenario),
        feasibility_score(plan, &traj, scenario),
    ];
    let w = [weights.smoothness, weights.threat_avoidance, weights.resource, weights.coordination, weights.feasibility];
    let wsum: f64 = w.iter().sum();
    let total = if wsum > 0.0 { s.iter().zip(w).map(|(s, w)| *s as f64 * w).sum::<f64>() / wsum } else { 0.0 };
    StaticScore { smoothness: s[0], threat_avoidance: s[1], resource: s[2], coordination: s[3], feasibility: s[4], total }
}
