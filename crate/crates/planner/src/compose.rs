//! Turns a route into a coordinated plan: bombers strike along it, fighters
//! suppress the air defences the bombers will cross and escort otherwise.

use crate::analyst::{bomber_actions, AssessmentVector};
use crate::kinematics::{planned_trajectories, route_actions};
use crate::pathfinder::{lattice_path, RouteSkeleton};
use crate::{PlanError, PlannerConfig};
use std::collections::BTreeMap;
use tacsim_core::{
    AtomicAction, CandidatePlan, EntityClass, EntityState, Intent, Scenario, Side, Vec2,
};

/// Scalar utility of an assessment: weighted success minus losses (as a
/// fraction of the plan-executing side) minus duration (as a fraction of the
/// horizon).
pub fn v_global(a: &AssessmentVector, intent: &Intent, scenario: &Scenario) -> f64 {
    let w = intent.priority_weights;
    let n_blue = scenario.side(Side::PlanExecuting).count().max(1) as f64;
    w.w_success * a.exp_success
        - w.w_loss * a.exp_loss / n_blue
        - w.w_time * a.exp_time / scenario.sim_config.horizon
}

/// Compose the plan for the route with the highest utility. Ties go to the
/// earlier route.
pub fn planner_compose(
    routes: &[RouteSkeleton],
    assessments: &[AssessmentVector],
    intent: &Intent,
    scenario: &Scenario,
    cfg: &PlannerConfig,
) -> Result<CandidatePlan, PlanError> {
    assert_eq!(routes.len(), assessments.len(), "one assessment per route");
    let mut best: Option<(usize, f64)> = None;
    for (i, a) in assessments.iter().enumerate() {
        let v = v_global(a, intent, scenario);
        if v >= cfg.v_floor && best.is_none_or(|(_, bv)| v > bv) {
            best = Some((i, v));
        }
    }
    let (i, v) = best.ok_or(PlanError::NoFeasibleRoute)?;
    let mut plan = compose_route(&routes[i], intent, scenario, cfg)?;
    plan.metadata.insert("v_global".into(), v.to_string());
    Ok(plan)
}

/// An air defence the bombers' planned paths enter.
#[derive(Debug, Clone)]
struct Crossing<'a> {
    threat: &'a EntityState,
    entry_tick: u64,
    exit_tick: u64,
    exposure: f64,
    /// Bomber position at the moment of entry.
    entry_point: Vec2,
}

fn crossings<'a>(
    scenario: &'a Scenario,
    bomber_traj: &BTreeMap<String, Vec<Vec2>>,
    bombers: &[&str],
) -> Vec<Crossing<'a>> {
    let mut out = Vec::new();
    for t in scenario.side(Side::Opponent).filter(|e| {
        e.is_alive()
            && matches!(
                e.class,
                EntityClass::AntiAirThreat | EntityClass::MissileThreatRegion
            )
    }) {
        let Some(w) = &t.weapon else { continue };
        let mut hit: Option<Crossing> = None;
        for id in bombers {
            let Some(points) = bomber_traj.get(*id) else {
                continue;
            };
            for (k, p) in points.iter().enumerate() {
                let d = p.dist(t.position);
                if d > w.range {
                    continue;
                }
                let k = k as u64;
                let c = hit.get_or_insert(Crossing {
                    threat: t,
                    entry_tick: k,
                    exit_tick: k,
                    exposure: 0.0,
                    entry_point: *p,
                });
                if k < c.entry_tick {
                    c.entry_tick = k;
                    c.entry_point = *p;
                }
                c.exit_tick = c.exit_tick.max(k);
                c.exposure += w.p_base * (1.0 - d / w.range);
            }
        }
        out.extend(hit);
    }
    out.sort_by(|a, b| {
        b.exposure
            .total_cmp(&a.exposure)
            .then_with(|| a.threat.id.cmp(&b.threat.id))
    });
    out
}

/// Fighter actions that reach a standoff point near `c.threat` and suppress
/// it for the whole time the bombers are inside its range. `None` when no
/// zone-free path to the standoff point exists.
fn suppression(
    fighter: &EntityState,
    c: &Crossing,
    scenario: &Scenario,
    cfg: &PlannerConfig,
) -> Option<Vec<AtomicAction>> {
    let sim = &scenario.sim_config;
    let reach = fighter.weapon.as_ref()?.range;
    let toward = (c.entry_point - c.threat.position).normalized();
    let toward = if toward.norm() > 0.0 {
        toward
    } else {
        (fighter.position - c.threat.position).normalized()
    };
    let stand = (c.threat.position + toward * (cfg.suppress_standoff * reach))
        .clamp_to(scenario.map_width, scenario.map_height);
    let path = lattice_path(fighter.position, stand, scenario, cfg, 0.0)?;
    let speed = scenario.constraint_set.speed_limit_for(fighter);
    let mut actions = route_actions(
        &fighter.id,
        fighter.position,
        &path[1..],
        speed,
        0,
        scenario,
    )
    .actions;
    let lead = cfg.tau_lead.unwrap_or(sim.tau_sup);
    let start = sim.time_of(sim.tick_of((sim.time_of(c.entry_tick) - lead).max(0.0)));
    let until = sim.time_of(c.exit_tick + 1);
    let duration = (until - start).max(sim.tau_sup);
    actions.push(AtomicAction::suppress(
        &fighter.id,
        start,
        &c.threat.id,
        duration,
    ));
    Some(actions)
}

/// Full plan for one route: bombers strike along it, fighter `i` suppresses
/// the `i`-th most exposed air defence, the rest escort bombers in turn.
pub fn compose_route(
    route: &RouteSkeleton,
    intent: &Intent,
    scenario: &Scenario,
    cfg: &PlannerConfig,
) -> Result<CandidatePlan, PlanError> {
    if scenario.entity(&intent.core_target_id).is_none() {
        return Err(PlanError::UnknownTarget(intent.core_target_id.clone()));
    }
    let mut actions = bomber_actions(route, intent, scenario, cfg);
    let bombers: Vec<&str> = scenario
        .side(Side::PlanExecuting)
        .filter(|e| e.class == EntityClass::Bomber && e.is_alive())
        .map(|e| e.id.as_str())
        .collect();
    let bomber_traj = planned_trajectories(&actions, scenario);
    let threats = crossings(scenario, &bomber_traj, &bombers);

    let fighters = scenario
        .side(Side::PlanExecuting)
        .filter(|e| e.class == EntityClass::Fighter && e.is_alive());
    let mut escorts = 0usize;
    for (i, f) in fighters.enumerate() {
        if let Some(extra) = threats
            .get(i)
            .and_then(|c| suppression(f, c, scenario, cfg))
        {
            actions.extend(extra);
            continue;
        }
        if bombers.is_empty() {
            continue;
        }
        let ally = bombers[escorts % bombers.len()];
        let side = if escorts % 2 == 0 { 1.0 } else { -1.0 };
        let offset = Vec2::new(cfg.escort_offset.x, cfg.escort_offset.y * side);
        actions.push(AtomicAction::escort(&f.id, 0.0, ally, offset));
        escorts += 1;
    }
    actions.sort_by(|a, b| a.schedule_cmp(b));
    let planned_trajectories = planned_trajectories(&actions, scenario);
    let metadata = BTreeMap::from([
        ("generator".to_string(), "hierarchical".to_string()),
        ("route_id".to_string(), route.route_id.clone()),
    ]);
    Ok(CandidatePlan {
        plan_id: format!("plan-{}", route.route_id),
        actions,
        planned_trajectories,
        metadata,
    })
}
