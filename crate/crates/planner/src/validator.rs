//! Rule-based plan checks against the scenario's constraint set.

use crate::kinematics::planned_trajectories;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use tacsim_core::plan::ActionKind;
use tacsim_core::{CandidatePlan, Scenario, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ViolationCode {
    AmmoExceeded,
    OutOfRangeLaunch,
    SpeedExceeded,
    NoFlyIncursion,
    TimestampDisorder,
    SalvoLimit,
    DurationExceeded,
}

impl ViolationCode {
    pub const ALL: [ViolationCode; 7] = [
        ViolationCode::AmmoExceeded,
        ViolationCode::OutOfRangeLaunch,
        ViolationCode::SpeedExceeded,
        ViolationCode::NoFlyIncursion,
        ViolationCode::TimestampDisorder,
        ViolationCode::SalvoLimit,
        ViolationCode::DurationExceeded,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub actor_id: String,
    /// Seconds.
    pub t: f64,
    /// Size of the breach: excess count, distance, speed or time overshoot,
    /// or incursion depth depending on the code.
    pub detail: f64,
}

impl Violation {
    fn new(code: ViolationCode, actor_id: &str, t: f64, detail: f64) -> Self {
        Violation {
            code,
            actor_id: actor_id.to_string(),
            t,
            detail,
        }
    }
}

/// Largest distance at which `actor` may launch: its weapon range, further
/// limited by the launch standoff constraint.
pub fn launch_limit(scenario: &Scenario, actor_id: &str) -> Option<f64> {
    let range = scenario.entity(actor_id)?.weapon.as_ref()?.range;
    Some(
        scenario
            .constraint_set
            .launch_standoff
            .map_or(range, |s| s.min(range)),
    )
}

/// Distance from `actor` to `target` at scheduled time `t` on the planned trajectory.
pub fn launch_distance(
    trajectories: &BTreeMap<String, Vec<Vec2>>,
    scenario: &Scenario,
    actor_id: &str,
    target_id: &str,
    t: f64,
) -> Option<f64> {
    let traj = trajectories.get(actor_id)?;
    let tick = (scenario.sim_config.tick_of(t) as usize).min(traj.len() - 1);
    Some(traj[tick].dist(scenario.entity(target_id)?.position))
}

/// Every constraint breach of `plan`, ordered by code then time then actor.
/// The plan's movement is re-simulated; supplied trajectories are ignored.
pub fn validator_check(plan: &CandidatePlan, scenario: &Scenario) -> Vec<Violation> {
    let traj = planned_trajectories(&plan.actions, scenario);
    check_with_trajectories(plan, scenario, &traj)
}

pub(crate) fn check_with_trajectories(
    plan: &CandidatePlan,
    scenario: &Scenario,
    traj: &BTreeMap<String, Vec<Vec2>>,
) -> Vec<Violation> {
    use ViolationCode::*;
    let cs = &scenario.constraint_set;
    let cfg = &scenario.sim_config;
    let mut out = Vec::new();

    // Launch budget.
    let mut launches: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for a in plan.actions.iter().filter(|a| a.is_launch()) {
        launches.entry(&a.actor_id).or_default().push(a.t_start);
    }
    for (actor, times) in &launches {
        let budget = scenario.entity(actor).map_or(0, |e| cs.ammo_budget_for(e)) as usize;
        if times.len() > budget {
            let last = times.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            out.push(Violation::new(
                AmmoExceeded,
                actor,
                last,
                (times.len() - budget) as f64,
            ));
        }
    }

    // Launch range.
    for a in &plan.actions {
        if let ActionKind::Launch { target_id, .. } = &a.kind {
            let (Some(limit), Some(d)) = (
                launch_limit(scenario, &a.actor_id),
                launch_distance(traj, scenario, &a.actor_id, target_id, a.t_start),
            ) else {
                continue;
            };
            if d > limit {
                out.push(Violation::new(
                    OutOfRangeLaunch,
                    &a.actor_id,
                    a.t_start,
                    d - limit,
                ));
            }
        }
    }

    // Commanded speed and realised speed.
    for a in &plan.actions {
        if let ActionKind::MoveTo { speed, .. } = &a.kind {
            if let Some(e) = scenario.entity(&a.actor_id) {
                let limit = cs.speed_limit_for(e);
                if *speed > limit + 1e-9 {
                    out.push(Violation::new(
                        SpeedExceeded,
                        &a.actor_id,
                        a.t_start,
                        speed - limit,
                    ));
                }
            }
        }
    }
    for (id, points) in traj {
        let Some(e) = scenario.entity(id) else {
            continue;
        };
        let limit = cs.speed_limit_for(e);
        let commanded_too_fast = out
            .iter()
            .any(|v| v.code == SpeedExceeded && v.actor_id == *id);
        if commanded_too_fast {
            continue;
        }
        let worst = points
            .windows(2)
            .enumerate()
            .map(|(k, w)| (k + 1, w[0].dist(w[1]) / cfg.dt - limit))
            .filter(|(_, over)| *over > 1e-6)
            .fold(None, |acc: Option<(usize, f64)>, (k, over)| match acc {
                Some((k0, o0)) => Some((k0, o0.max(over))),
                None => Some((k, over)),
            });
        if let Some((k, over)) = worst {
            out.push(Violation::new(
                SpeedExceeded,
                id,
                cfg.time_of(k as u64),
                over,
            ));
        }
    }

    // No-fly zones: one violation per contiguous incursion.
    for (id, points) in traj {
        for zone in &cs.no_fly_zones {
            let mut inside_since: Option<(usize, f64)> = None;
            let close = |since: &mut Option<(usize, f64)>, out: &mut Vec<Violation>| {
                if let Some((k, depth)) = since.take() {
                    out.push(Violation::new(
                        NoFlyIncursion,
                        id,
                        cfg.time_of(k as u64),
                        depth,
                    ));
                }
            };
            for k in 1..points.len() {
                let d = tacsim_core::geom::point_segment_distance(
                    zone.center,
                    points[k - 1],
                    points[k],
                );
                if d < zone.radius {
                    let depth = zone.radius - d;
                    inside_since = Some(match inside_since {
                        Some((k0, d0)) => (k0, d0.max(depth)),
                        None => (k, depth),
                    });
                } else {
                    close(&mut inside_since, &mut out);
                }
            }
            close(&mut inside_since, &mut out);
        }
    }

    // Per-actor timestamp order as listed.
    let mut latest: BTreeMap<&str, f64> = BTreeMap::new();
    for a in &plan.actions {
        let prev = latest.entry(&a.actor_id).or_insert(f64::NEG_INFINITY);
        if a.t_start < *prev {
            out.push(Violation::new(
                TimestampDisorder,
                &a.actor_id,
                a.t_start,
                *prev - a.t_start,
            ));
        } else {
            *prev = a.t_start;
        }
    }

    // Simultaneous launches.
    let mut per_tick: BTreeMap<u64, Vec<&str>> = BTreeMap::new();
    for a in plan.actions.iter().filter(|a| a.is_launch()) {
        per_tick
            .entry(cfg.tick_of(a.t_start))
            .or_default()
            .push(&a.actor_id);
    }
    for (tick, mut actors) in per_tick {
        let cap = cs.max_salvo_per_tick as usize;
        if actors.len() > cap {
            actors.sort();
            out.push(Violation::new(
                SalvoLimit,
                actors[cap],
                cfg.time_of(tick),
                (actors.len() - cap) as f64,
            ));
        }
    }

    // Plan duration.
    let max = cs.max_duration(cfg);
    for a in &plan.actions {
        if a.t_start > max + 1e-9 {
            out.push(Violation::new(
                DurationExceeded,
                &a.actor_id,
                a.t_start,
                a.t_start - max,
            ));
        }
    }

    out.sort_by(|a, b| {
        a.code
            .cmp(&b.code)
            .then(a.t.total_cmp(&b.t))
            .then_with(|| a.actor_id.cmp(&b.actor_id))
    });
    out
}
