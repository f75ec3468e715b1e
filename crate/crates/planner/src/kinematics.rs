//! Deterministic replay of a plan's own movement, without opponents or
//! randomness.

use std::collections::BTreeMap;
use tacsim_core::plan::ActionKind;
use tacsim_core::sim::{delivery_buckets, step, GlobalState, RngStream, ARRIVAL_EPS};
use tacsim_core::{AtomicAction, Scenario, Side, Vec2};

/// Positions of every plan-executing entity at ticks `0..=horizon` when only
/// the plan's movement orders are executed. Uses the engine itself, so the
/// result matches a rollout in which nobody is hit.
pub fn planned_trajectories(
    actions: &[AtomicAction],
    scenario: &Scenario,
) -> BTreeMap<String, Vec<Vec2>> {
    let movement: Vec<AtomicAction> = actions
        .iter()
        .filter(|a| {
            matches!(
                a.kind,
                ActionKind::MoveTo { .. } | ActionKind::Escort { .. }
            )
        })
        .cloned()
        .collect();
    let buckets = delivery_buckets(&movement, scenario);
    let blue: Vec<usize> = scenario
        .entities
        .iter()
        .enumerate()
        .filter(|(_, e)| e.side == Side::PlanExecuting)
        .map(|(i, _)| i)
        .collect();
    let mut out: BTreeMap<String, Vec<Vec2>> = blue
        .iter()
        .map(|&i| (scenario.entities[i].id.clone(), Vec::new()))
        .collect();
    let mut state = GlobalState::initial(scenario);
    // Nothing here fires, so the generator must never be consulted.
    let mut rng = RngStream::scripted([]);
    for tick in 0..=scenario.sim_config.horizon_ticks() as usize {
        if tick > 0 {
            state = step(&state, &buckets[tick], &[], scenario, &mut rng).state;
        }
        for &i in &blue {
            out.get_mut(&scenario.entities[i].id)
                .expect("seeded above")
                .push(state.entities[i].position);
        }
    }
    out
}

/// MOVE_TO chain that flies `waypoints` in order, each leg commanded the tick
/// after the previous one is reached.
#[derive(Debug, Clone, PartialEq)]
pub struct LegSchedule {
    pub actions: Vec<AtomicAction>,
    /// Tick at which each waypoint is reached (may exceed the horizon).
    pub arrivals: Vec<u64>,
}

impl LegSchedule {
    /// Tick at which the final waypoint is reached.
    pub fn arrival(&self) -> Option<u64> {
        self.arrivals.last().copied()
    }
}

/// Build the MOVE_TO chain for one entity starting at `start` and first
/// commanded at `start_tick`. Integrates with the same arithmetic as the
/// engine so the arrival ticks are exact.
pub fn route_actions(
    actor_id: &str,
    start: Vec2,
    waypoints: &[Vec2],
    speed: f64,
    start_tick: u64,
    scenario: &Scenario,
) -> LegSchedule {
    let dt = scenario.sim_config.dt;
    let horizon = scenario.sim_config.horizon_ticks();
    let (w, h) = (scenario.map_width, scenario.map_height);
    let reach = speed * dt;
    let mut pos = start;
    let mut out = LegSchedule {
        actions: Vec::new(),
        arrivals: Vec::new(),
    };
    let mut command_tick = start_tick;
    for &raw in waypoints {
        let goal = raw.clamp_to(w, h);
        if goal == pos {
            continue;
        }
        if command_tick > horizon || !(reach > 0.0) {
            break;
        }
        out.actions.push(AtomicAction::move_to(
            actor_id,
            command_tick as f64 * dt,
            goal,
            speed,
        ));
        let mut tick = command_tick.max(1);
        loop {
            let to_goal = goal - pos;
            let remaining = to_goal.norm();
            if remaining <= reach + ARRIVAL_EPS {
                pos = goal;
                break;
            }
            pos = (pos + to_goal * (reach / remaining)).clamp_to(w, h);
            tick += 1;
        }
        out.arrivals.push(tick);
        command_tick = tick + 1;
    }
    out
}
