//! Local, deterministic plan repair.

use crate::kinematics::planned_trajectories;
use crate::validator::{launch_distance, launch_limit, validator_check, Violation, ViolationCode};
use crate::PlanError;
use std::collections::BTreeMap;
use tacsim_core::geom::{point_segment_distance, Circle, Vec2};
use tacsim_core::plan::ActionKind;
use tacsim_core::sim::ARRIVAL_EPS;
use tacsim_core::{AtomicAction, CandidatePlan, Scenario};

/// Order in which violation classes are repaired. Movement fixes come
/// before launch fixes because launches are re-timed against the repaired
/// trajectory.
pub const REPAIR_ORDER: [ViolationCode; 7] = [
    ViolationCode::TimestampDisorder,
    ViolationCode::SpeedExceeded,
    ViolationCode::NoFlyIncursion,
    ViolationCode::OutOfRangeLaunch,
    ViolationCode::SalvoLimit,
    ViolationCode::AmmoExceeded,
    ViolationCode::DurationExceeded,
];

/// Violation counts in repair order; repairs must decrease this
/// lexicographically.
pub fn progress_key(violations: &[Violation]) -> [usize; 7] {
    REPAIR_ORDER.map(|c| violations.iter().filter(|v| v.code == c).count())
}

fn irreparable(v: &Violation, reason: &str) -> PlanError {
    PlanError::IrreparableViolation {
        code: v.code,
        actor_id: v.actor_id.clone(),
        reason: reason.to_string(),
    }
}

/// Apply one edit rule per violation class present in `violations`, in
/// [`REPAIR_ORDER`], and regenerate the planned trajectories.
pub fn repair_plan(
    plan: &CandidatePlan,
    violations: &[Violation],
    scenario: &Scenario,
) -> Result<CandidatePlan, PlanError> {
    let mut out = plan.clone();
    for code in REPAIR_ORDER {
        if !violations.iter().any(|v| v.code == code) {
            continue;
        }
        // Later rules see the effect of earlier ones.
        let current: Vec<Violation> = if code == REPAIR_ORDER[0] {
            violations
                .iter()
                .filter(|v| v.code == code)
                .cloned()
                .collect()
        } else {
            validator_check(&out, scenario)
                .into_iter()
                .filter(|v| v.code == code)
                .collect()
        };
        if current.is_empty() {
            continue;
        }
        match code {
            ViolationCode::TimestampDisorder => out.sort_actions(),
            ViolationCode::SpeedExceeded => repair_speed(&mut out, &current, scenario)?,
            ViolationCode::NoFlyIncursion => repair_no_fly(&mut out, &current, scenario)?,
            ViolationCode::OutOfRangeLaunch => repair_range(&mut out, &current, scenario),
            ViolationCode::SalvoLimit => repair_salvo(&mut out, scenario),
            ViolationCode::AmmoExceeded => repair_ammo(&mut out, scenario),
            ViolationCode::DurationExceeded => {
                let max = scenario.constraint_set.max_duration(&scenario.sim_config);
                out.actions.retain(|a| a.t_start <= max + 1e-9);
            }
        }
    }
    out.sort_actions();
    out.planned_trajectories = planned_trajectories(&out.actions, scenario);
    Ok(out)
}

/// Validate and repair until clean, at most `r_max` times. Returns the plan
/// and the number of repairs applied.
pub fn repair_loop(
    plan: CandidatePlan,
    scenario: &Scenario,
    r_max: usize,
) -> Result<(CandidatePlan, usize), PlanError> {
    let mut plan = plan;
    let mut violations = validator_check(&plan, scenario);
    for round in 0..r_max {
        if violations.is_empty() {
            return Ok((plan, round));
        }
        let next = repair_plan(&plan, &violations, scenario)?;
        let next_violations = validator_check(&next, scenario);
        if progress_key(&next_violations) >= progress_key(&violations) {
            let v = &violations[0];
            return Err(irreparable(v, "repair made no progress"));
        }
        plan = next;
        violations = next_violations;
    }
    if violations.is_empty() {
        Ok((plan, r_max))
    } else {
        Err(PlanError::StillInvalid { violations })
    }
}

/// One MOVE_TO leg of an actor's chain.
#[derive(Debug, Clone)]
struct Leg {
    index: usize,
    tick: u64,
    waypoint: Vec2,
    speed: f64,
}

fn legs_of(plan: &CandidatePlan, actor: &str, scenario: &Scenario) -> Vec<Leg> {
    plan.actions
        .iter()
        .enumerate()
        .filter(|(_, a)| a.actor_id == actor)
        .filter_map(|(i, a)| match a.kind {
            ActionKind::MoveTo { waypoint, speed } => Some(Leg {
                index: i,
                tick: scenario.sim_config.tick_of(a.t_start),
                waypoint,
                speed,
            }),
            _ => None,
        })
        .collect()
}

fn has_escort(plan: &CandidatePlan, actor: &str) -> bool {
    plan.actions
        .iter()
        .any(|a| a.actor_id == actor && matches!(a.kind, ActionKind::Escort { .. }))
}

/// Rewrite an actor's MOVE_TO chain so each leg starts no earlier than the
/// tick after the previous waypoint is reached, keeping intentional waits.
fn retime_chain(plan: &mut CandidatePlan, actor: &str, scenario: &Scenario) {
    let Some(entity) = scenario.entity(actor) else {
        return;
    };
    let legs = legs_of(plan, actor, scenario);
    let dt = scenario.sim_config.dt;
    let (w, h) = (scenario.map_width, scenario.map_height);
    let mut pos = entity.position;
    let mut earliest = 0u64;
    let mut new_times = Vec::new();
    for leg in &legs {
        let tick = leg.tick.max(earliest);
        new_times.push((leg.index, tick));
        let goal = leg.waypoint.clamp_to(w, h);
        let reach = leg.speed.min(entity.speed_max) * dt;
        let mut t = tick.max(1);
        if reach > 0.0 {
            loop {
                let to_goal = goal - pos;
                let remaining = to_goal.norm();
                if remaining <= reach + ARRIVAL_EPS {
                    pos = goal;
                    break;
                }
                pos = (pos + to_goal * (reach / remaining)).clamp_to(w, h);
                t += 1;
            }
        }
        earliest = t + 1;
    }
    for (i, tick) in new_times {
        plan.actions[i].t_start = tick as f64 * dt;
    }
}

fn repair_speed(
    plan: &mut CandidatePlan,
    violations: &[Violation],
    scenario: &Scenario,
) -> Result<(), PlanError> {
    let mut actors: Vec<&str> = violations.iter().map(|v| v.actor_id.as_str()).collect();
    actors.dedup();
    for actor in actors {
        let entity = scenario
            .entity(actor)
            .ok_or_else(|| irreparable(&violations[0], "unknown actor"))?;
        let limit = scenario.constraint_set.speed_limit_for(entity);
        let mut clamped = false;
        for a in plan.actions.iter_mut().filter(|a| a.actor_id == actor) {
            if let ActionKind::MoveTo { speed, .. } = &mut a.kind {
                if *speed > limit {
                    *speed = limit;
                    clamped = true;
                }
            }
        }
        if !clamped {
            let v = violations
                .iter()
                .find(|v| v.actor_id == actor)
                .expect("actor came from violations");
            return Err(irreparable(
                v,
                "realised speed exceeds the limit without a commanded MOVE_TO to slow down",
            ));
        }
        if !has_escort(plan, actor) {
            retime_chain(plan, actor, scenario);
        }
    }
    Ok(())
}

/// A point beside `zone`, on the side of the segment `a`-`b`, from which both
/// `a` and `b` are reachable without touching any zone.
fn detour_point(
    a: Vec2,
    b: Vec2,
    zone: &Circle,
    zones: &[Circle],
    scenario: &Scenario,
) -> Option<Vec2> {
    let closest = tacsim_core::geom::closest_point_on_segment(zone.center, a, b);
    let dir = b - a;
    let mut normal = closest - zone.center;
    if normal.norm() < 1e-9 {
        normal = Vec2::new(-dir.y, dir.x);
    }
    let normal = normal.normalized();
    let clear = |p: Vec2, q: Vec2| {
        zones
            .iter()
            .all(|z| point_segment_distance(z.center, p, q) >= z.radius + 0.5)
    };
    for side in [1.0, -1.0] {
        for k in 0..60 {
            let scale = 1.05 + 0.05 * k as f64;
            let c = zone.center + normal * (side * zone.radius * scale);
            let inside = (0.0..=scenario.map_width).contains(&c.x)
                && (0.0..=scenario.map_height).contains(&c.y);
            if inside && clear(a, c) && clear(c, b) {
                return Some(c);
            }
        }
    }
    None
}

fn repair_no_fly(
    plan: &mut CandidatePlan,
    violations: &[Violation],
    scenario: &Scenario,
) -> Result<(), PlanError> {
    let zones = &scenario.constraint_set.no_fly_zones;
    // Fix one incursion per actor per pass (the earliest); the next pass sees
    // the re-timed chain.
    let mut seen = Vec::new();
    for v in violations {
        if seen.contains(&v.actor_id) {
            continue;
        }
        seen.push(v.actor_id.clone());
        if has_escort(plan, &v.actor_id) {
            return Err(irreparable(v, "escort movement cannot be re-routed"));
        }
        let traj = planned_trajectories(&plan.actions, scenario);
        let points = &traj[&v.actor_id];
        let tick = scenario.sim_config.tick_of(v.t);
        let legs = legs_of(plan, &v.actor_id, scenario);
        let leg = legs
            .iter()
            .rev()
            .find(|l| l.tick.max(1) <= tick)
            .ok_or_else(|| irreparable(v, "no MOVE_TO leg covers the incursion"))?;
        let leg_start = points[(leg.tick.max(1) - 1) as usize];
        let zone = zones
            .iter()
            .find(|z| {
                point_segment_distance(z.center, points[tick as usize - 1], points[tick as usize])
                    < z.radius
            })
            .ok_or_else(|| irreparable(v, "incursion zone not found"))?;
        let detour = detour_point(leg_start, leg.waypoint, zone, zones, scenario)
            .ok_or_else(|| irreparable(v, "no clear detour point"))?;
        let actor = v.actor_id.clone();
        let t = plan.actions[leg.index].t_start;
        plan.actions.insert(
            leg.index,
            AtomicAction::move_to(&actor, t, detour, leg.speed),
        );
        // The original leg now follows the detour.
        plan.actions[leg.index + 1].t_start = t + scenario.sim_config.dt;
        retime_chain(plan, &actor, scenario);
    }
    Ok(())
}

fn repair_range(plan: &mut CandidatePlan, violations: &[Violation], scenario: &Scenario) {
    let traj = planned_trajectories(&plan.actions, scenario);
    let cfg = &scenario.sim_config;
    let last_tick = cfg
        .tick_of(scenario.constraint_set.max_duration(cfg))
        .min(cfg.horizon_ticks());
    let mut drop = Vec::new();
    for (i, a) in plan.actions.iter_mut().enumerate() {
        let ActionKind::Launch { target_id, .. } = &a.kind else {
            continue;
        };
        if !violations
            .iter()
            .any(|v| v.actor_id == a.actor_id && (v.t - a.t_start).abs() < 1e-9)
        {
            continue;
        }
        let limit = launch_limit(scenario, &a.actor_id).unwrap_or(0.0);
        let from = cfg.tick_of(a.t_start);
        let first_in_range = (from..=last_tick).find(|&k| {
            launch_distance(&traj, scenario, &a.actor_id, target_id, cfg.time_of(k))
                .is_some_and(|d| d <= limit)
        });
        match first_in_range {
            Some(k) => a.t_start = cfg.time_of(k),
            None => drop.push(i),
        }
    }
    for i in drop.into_iter().rev() {
        plan.actions.remove(i);
    }
    plan.sort_actions();
}

fn repair_salvo(plan: &mut CandidatePlan, scenario: &Scenario) {
    let cfg = &scenario.sim_config;
    let cap = scenario.constraint_set.max_salvo_per_tick as usize;
    let last_tick = cfg
        .tick_of(scenario.constraint_set.max_duration(cfg))
        .min(cfg.horizon_ticks());
    let traj = planned_trajectories(&plan.actions, scenario);
    plan.sort_actions();
    let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
    let mut drop = Vec::new();
    for i in 0..plan.actions.len() {
        let a = &plan.actions[i];
        let ActionKind::Launch { target_id, .. } = &a.kind else {
            continue;
        };
        let tick = cfg.tick_of(a.t_start);
        if counts.get(&tick).copied().unwrap_or(0) < cap {
            *counts.entry(tick).or_default() += 1;
            continue;
        }
        let limit = launch_limit(scenario, &a.actor_id).unwrap_or(0.0);
        let slot = (tick + 1..=last_tick).find(|k| {
            counts.get(k).copied().unwrap_or(0) < cap
                && launch_distance(&traj, scenario, &a.actor_id, target_id, cfg.time_of(*k))
                    .is_some_and(|d| d <= limit)
        });
        match slot {
            Some(k) => {
                *counts.entry(k).or_default() += 1;
                plan.actions[i].t_start = cfg.time_of(k);
            }
            None => drop.push(i),
        }
    }
    for i in drop.into_iter().rev() {
        plan.actions.remove(i);
    }
    plan.sort_actions();
}

fn repair_ammo(plan: &mut CandidatePlan, scenario: &Scenario) {
    let mut by_actor: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, a) in plan
        .actions
        .iter()
        .enumerate()
        .filter(|(_, a)| a.is_launch())
    {
        by_actor.entry(a.actor_id.clone()).or_default().push(i);
    }
    let mut drop = Vec::new();
    for (actor, mut idx) in by_actor {
        let budget = scenario
            .entity(&actor)
            .map_or(0, |e| scenario.constraint_set.ammo_budget_for(e))
            as usize;
        if idx.len() > budget {
            let excess = idx.len() - budget;
            // Latest first; among equal times the later-listed one goes.
            idx.sort_by(|&a, &b| {
                plan.actions[b]
                    .t_start
                    .total_cmp(&plan.actions[a].t_start)
                    .then(b.cmp(&a))
            });
            drop.extend(idx.into_iter().take(excess));
        }
    }
    drop.sort_unstable();
    for i in drop.into_iter().rev() {
        plan.actions.remove(i);
    }
}
