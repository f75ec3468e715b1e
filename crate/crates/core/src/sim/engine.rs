//! The per-tick state transition.
//!
//! A step advances the state from tick `k` to `k + 1`; everything it does is
//! stamped with the new tick and time `(k + 1) * dt`. Within a step the
//! phases run in a fixed order:
//!
//! 0. install the orders carried by this tick's actions;
//! 1. expire suppression windows that have ended;
//! 2. integrate movement;
//! 3. fire suppression shots for active SUPPRESS tasks;
//! 4. resolve LAUNCH requests of both sides in stored entity order.
//!
//! Entities are always serviced in stored order, which fixes the order of
//! random draws.

use super::event::{Event, EventKind};
use super::fire::{resolve_fire, FireMode, TIME_EPS};
use super::rng::RngStream;
use crate::geom::Vec2;
use crate::plan::{ActionKind, AtomicAction};
use crate::scenario::{EntityClass, EntityState, Order, Scenario, Side, SuppressTask};
use serde::{Deserialize, Serialize};

/// Slack on the final step of a move so rounding in the per-tick step
/// length does not cost an extra tick.
pub const ARRIVAL_EPS: f64 = 1e-9;

/// Full battlefield state at one tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlobalState {
    pub tick: u64,
    pub time: f64,
    pub entities: Vec<EntityState>,
    /// Events emitted by the step that produced this state.
    #[serde(default)]
    pub transient_events: Vec<Event>,
}

impl GlobalState {
    pub fn initial(scenario: &Scenario) -> Self {
        GlobalState {
            tick: 0,
            time: 0.0,
            entities: scenario.entities.clone(),
            transient_events: Vec::new(),
        }
    }

    pub fn entity(&self, id: &str) -> Option<&EntityState> {
        self.entities.iter().find(|e| e.id == id)
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.entities.iter().position(|e| e.id == id)
    }

    pub fn alive(&self, side: Side) -> impl Iterator<Item = (usize, &EntityState)> {
        self.entities
            .iter()
            .enumerate()
            .filter(move |(_, e)| e.side == side && e.is_alive())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StaleReason {
    UnknownEntity,
    DeadActor,
    DeadTarget,
    WrongSide,
}

/// An action the engine dropped instead of executing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaleAction {
    pub tick: u64,
    pub actor_id: String,
    pub kind: String,
    pub reason: StaleReason,
}

#[derive(Debug, Clone)]
pub struct StepResult {
    pub state: GlobalState,
    pub stale: Vec<StaleAction>,
}

/// Two distinct mutable entries of a slice.
fn pair_mut<T>(v: &mut [T], a: usize, b: usize) -> (&mut T, &mut T) {
    assert_ne!(a, b);
    if a < b {
        let (lo, hi) = v.split_at_mut(b);
        (&mut lo[a], &mut hi[0])
    } else {
        let (lo, hi) = v.split_at_mut(a);
        (&mut hi[0], &mut lo[b])
    }
}

fn fire_at(
    state: &mut GlobalState,
    shooter: usize,
    target: usize,
    mode: FireMode,
    scenario: &Scenario,
    rng: &mut RngStream,
) {
    if shooter == target {
        return;
    }
    let (tick, now) = (state.tick, state.time);
    let r = resolve_fire(
        &state.entities[shooter],
        &state.entities[target],
        tick,
        now,
        mode,
        &scenario.sim_config,
        rng,
    );
    let (s, t) = pair_mut(&mut state.entities, shooter, target);
    r.delta.apply(s, t);
    state.transient_events.extend(r.events);
}

/// Advance one tick. `blue` must only command plan-executing entities and
/// `red` only opponent entities; anything else is dropped as stale.
pub fn step(
    state: &GlobalState,
    blue: &[AtomicAction],
    red: &[AtomicAction],
    scenario: &Scenario,
    rng: &mut RngStream,
) -> StepResult {
    let cfg = &scenario.sim_config;
    let mut next = state.clone();
    next.tick = state.tick + 1;
    next.time = next.tick as f64 * cfg.dt;
    next.transient_events.clear();
    let now = next.time;
    let tick = next.tick;
    let mut stale = Vec::new();
    let mut launches: Vec<(usize, usize)> = Vec::new();

    // 0. orders
    let tagged = blue
        .iter()
        .map(|a| (Side::PlanExecuting, a))
        .chain(red.iter().map(|a| (Side::Opponent, a)));
    for (side, action) in tagged {
        let mut drop = |reason| {
            stale.push(StaleAction {
                tick,
                actor_id: action.actor_id.clone(),
                kind: action.kind_name().into(),
                reason,
            })
        };
        let Some(ai) = next.index_of(&action.actor_id) else {
            drop(StaleReason::UnknownEntity);
            continue;
        };
        if next.entities[ai].side != side {
            drop(StaleReason::WrongSide);
            continue;
        }
        if !next.entities[ai].is_alive() {
            drop(StaleReason::DeadActor);
            continue;
        }
        let target = match action.target_id() {
            Some(id) => match next.index_of(id) {
                None => {
                    drop(StaleReason::UnknownEntity);
                    continue;
                }
                Some(ti) if !next.entities[ti].is_alive() => {
                    drop(StaleReason::DeadTarget);
                    continue;
                }
                Some(ti) => Some(ti),
            },
            None => None,
        };
        let actor = &mut next.entities[ai];
        match &action.kind {
            ActionKind::MoveTo { waypoint, speed } => {
                let waypoint = waypoint.clamp_to(scenario.map_width, scenario.map_height);
                actor.order = Some(Order::MoveTo {
                    waypoint,
                    speed: speed.min(actor.speed_max).max(0.0),
                });
            }
            ActionKind::Escort { ally_id, offset } => {
                actor.order = Some(Order::Escort {
                    ally_id: ally_id.clone(),
                    offset: *offset,
                });
            }
            ActionKind::Suppress {
                target_id,
                duration,
            } => {
                actor.suppress_task = Some(SuppressTask {
                    target_id: target_id.clone(),
                    until: action.t_start + duration,
                });
            }
            ActionKind::Launch { .. } => launches.push((ai, target.expect("launch has a target"))),
        }
    }

    // 1. suppression expiry
    for e in next.entities.iter_mut() {
        if let Some(until) = e.suppressed_until {
            if now >= until - TIME_EPS {
                e.suppressed_until = None;
                next.transient_events
                    .push(Event::new(tick, EventKind::SuppressEnd, &e.id, None));
            }
        }
    }

    // 2. movement
    let snapshot: Vec<Vec2> = next.entities.iter().map(|e| e.position).collect();
    for i in 0..next.entities.len() {
        let e = &next.entities[i];
        if !e.is_alive() {
            continue;
        }
        let (goal, speed, completes) = match &e.order {
            None => continue,
            Some(Order::MoveTo { waypoint, speed }) => (*waypoint, *speed, true),
            Some(Order::Escort { ally_id, offset }) => {
                match next
                    .entities
                    .iter()
                    .position(|a| &a.id == ally_id)
                    .filter(|&j| next.entities[j].is_alive())
                {
                    Some(j) => (
                        (snapshot[j] + *offset).clamp_to(scenario.map_width, scenario.map_height),
                        e.speed_max,
                        false,
                    ),
                    None => continue,
                }
            }
        };
        let e = &mut next.entities[i];
        let to_goal = goal - e.position;
        let remaining = to_goal.norm();
        let reach = speed * cfg.dt;
        if remaining <= reach + ARRIVAL_EPS {
            if remaining > 0.0 {
                e.heading = to_goal.y.atan2(to_goal.x);
            }
            e.position = goal;
            if completes {
                e.order = None;
                next.transient_events
                    .push(Event::new(tick, EventKind::MoveCompleted, &e.id, None));
            }
        } else {
            e.heading = to_goal.y.atan2(to_goal.x);
            e.position = (e.position + to_goal * (reach / remaining))
                .clamp_to(scenario.map_width, scenario.map_height);
        }
    }

    // 3. suppression shots
    for i in 0..next.entities.len() {
        let e = &next.entities[i];
        if !e.is_alive() || e.side != Side::PlanExecuting {
            continue;
        }
        let Some(task) = &e.suppress_task else {
            continue;
        };
        if now > task.until + TIME_EPS {
            next.entities[i].suppress_task = None;
            continue;
        }
        let Some(t) = next.index_of(&task.target_id) else {
            continue;
        };
        let target = &next.entities[t];
        if !target.is_alive() || target.is_suppressed(now) {
            continue;
        }
        fire_at(&mut next, i, t, FireMode::Suppress, scenario, rng);
    }

    // 4. launches, in stored entity order
    launches.sort_by_key(|&(shooter, _)| shooter);
    for (shooter, target) in launches {
        fire_at(&mut next, shooter, target, FireMode::Strike, scenario, rng);
    }

    StepResult { state: next, stale }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    AllFriendlyLost,
    HorizonExceeded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Continue,
    Success,
    Failure(FailureReason),
}

/// Success (core target dead) takes precedence over loss of all friendlies,
/// which takes precedence over running out of time.
pub fn check_termination(state: &GlobalState, scenario: &Scenario) -> Termination {
    let core_dead = state
        .entity(&scenario.core_target_id)
        .is_some_and(|e| !e.is_alive());
    if core_dead {
        return Termination::Success;
    }
    if state.alive(Side::PlanExecuting).next().is_none() {
        return Termination::Failure(FailureReason::AllFriendlyLost);
    }
    if state.tick >= scenario.sim_config.horizon_ticks() {
        return Termination::Failure(FailureReason::HorizonExceeded);
    }
    Termination::Continue
}

/// Whether the class can be a suppression target at all.
pub fn is_air_defense(class: EntityClass) -> bool {
    matches!(
        class,
        EntityClass::AntiAirThreat | EntityClass::MissileThreatRegion | EntityClass::AirPatrol
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{ConstraintSet, SimConfig, WeaponSpec};

    fn base_scenario(entities: Vec<EntityState>) -> Scenario {
        Scenario {
            name: "engine".into(),
            map_width: 260.0,
            map_height: 160.0,
            entities,
            core_target_id: "CC".into(),
            constraint_set: ConstraintSet::default(),
            difficulty: Default::default(),
            sim_config: SimConfig::default(),
        }
        .validated()
        .unwrap()
    }

    fn cc(at: Vec2) -> EntityState {
        EntityState::new("CC", Side::Opponent, EntityClass::CommandCenter, at, 100.0)
    }

    #[test]
    fn idle_step_changes_nothing_and_draws_nothing() {
        let s = base_scenario(vec![
            cc(Vec2::new(200.0, 80.0)),
            EntityState::new(
                "B",
                Side::PlanExecuting,
                EntityClass::Bomber,
                Vec2::new(10.0, 10.0),
                100.0,
            )
            .with_speed(5.0),
        ]);
        let st = GlobalState::initial(&s);
        let mut rng = RngStream::new(1, 0);
        let out = step(&st, &[], &[], &s, &mut rng);
        assert_eq!(out.state.entities, st.entities);
        assert_eq!(out.state.tick, 1);
        assert!(out.state.transient_events.is_empty());
        assert_eq!(rng.draw_counter, 0);
    }

    #[test]
    fn move_to_advances_speed_times_dt() {
        let s = base_scenario(vec![
            cc(Vec2::new(200.0, 80.0)),
            EntityState::new(
                "B",
                Side::PlanExecuting,
                EntityClass::Bomber,
                Vec2::new(0.0, 0.0),
                100.0,
            )
            .with_speed(5.0),
        ]);
        let st = GlobalState::initial(&s);
        let mv = AtomicAction::move_to("B", 0.0, Vec2::new(10.0, 0.0), 5.0);
        let out = step(&st, &[mv], &[], &s, &mut RngStream::new(1, 0));
        let b = out.state.entity("B").unwrap();
        assert!((b.position.x - 0.5).abs() < 1e-12 && b.position.y == 0.0);
    }

    #[test]
    fn arrival_emits_move_completed_and_clamps() {
        let s = base_scenario(vec![
            cc(Vec2::new(200.0, 80.0)),
            EntityState::new(
                "B",
                Side::PlanExecuting,
                EntityClass::Bomber,
                Vec2::new(259.8, 10.0),
                100.0,
            )
            .with_speed(5.0),
        ]);
        let mut st = GlobalState::initial(&s);
        let mv = AtomicAction::move_to("B", 0.0, Vec2::new(300.0, 10.0), 5.0);
        let mut rng = RngStream::new(1, 0);
        st = step(&st, &[mv], &[], &s, &mut rng).state;
        assert_eq!(st.entity("B").unwrap().position, Vec2::new(260.0, 10.0));
        assert_eq!(st.transient_events[0].kind, EventKind::MoveCompleted);
    }

    #[test]
    fn stale_actions_are_dropped() {
        let mut dead = EntityState::new(
            "B",
            Side::PlanExecuting,
            EntityClass::Bomber,
            Vec2::ZERO,
            100.0,
        )
        .with_speed(5.0);
        dead.health = 0.0;
        let s = base_scenario(vec![cc(Vec2::new(200.0, 80.0)), dead]);
        let st = GlobalState::initial(&s);
        let out = step(
            &st,
            &[AtomicAction::move_to("B", 0.0, Vec2::new(3.0, 0.0), 1.0)],
            &[],
            &s,
            &mut RngStream::new(1, 0),
        );
        assert_eq!(out.stale[0].reason, StaleReason::DeadActor);
        assert_eq!(out.state.entity("B").unwrap().position, Vec2::ZERO);
        let wrong = step(
            &st,
            &[],
            &[AtomicAction::move_to("B", 0.0, Vec2::new(3.0, 0.0), 1.0)],
            &s,
            &mut RngStream::new(1, 0),
        );
        assert_eq!(wrong.stale[0].reason, StaleReason::WrongSide);
    }

    #[test]
    fn termination_precedence() {
        let s = base_scenario(vec![
            cc(Vec2::new(200.0, 80.0)),
            EntityState::new(
                "B",
                Side::PlanExecuting,
                EntityClass::Bomber,
                Vec2::ZERO,
                100.0,
            ),
        ]);
        let mut st = GlobalState::initial(&s);
        assert_eq!(check_termination(&st, &s), Termination::Continue);
        st.tick = 200;
        assert_eq!(
            check_termination(&st, &s),
            Termination::Failure(FailureReason::HorizonExceeded)
        );
        st.entities[1].health = 0.0;
        assert_eq!(
            check_termination(&st, &s),
            Termination::Failure(FailureReason::AllFriendlyLost)
        );
        st.entities[0].health = 0.0;
        assert_eq!(check_termination(&st, &s), Termination::Success);
    }

    #[test]
    fn suppressed_shooter_waits_for_stretched_interval() {
        let aat_weapon = WeaponSpec {
            name: "sam".into(),
            p_base: 0.5,
            range: 50.0,
            rof_base: 1.0,
            damage: 1.0,
            ammo_capacity: 100,
        };
        let mut aat = EntityState::new(
            "AAT",
            Side::Opponent,
            EntityClass::AntiAirThreat,
            Vec2::new(100.0, 80.0),
            100.0,
        )
        .with_weapon(aat_weapon);
        aat.last_fire_time = Some(0.0);
        aat.suppressed_until = Some(5.0);
        let s = base_scenario(vec![
            cc(Vec2::new(200.0, 80.0)),
            aat,
            EntityState::new(
                "B",
                Side::PlanExecuting,
                EntityClass::Bomber,
                Vec2::new(90.0, 80.0),
                1e9,
            ),
        ]);
        let mut st = GlobalState::initial(&s);
        let mut rng = RngStream::new(3, 0);
        let mut fires = Vec::new();
        while st.tick < 30 {
            let t_next = (st.tick + 1) as f64 * s.sim_config.dt;
            let red = [AtomicAction::launch("AAT", t_next, "sam", "B")];
            st = step(&st, &[], &red, &s, &mut rng).state;
            fires.extend(
                st.transient_events
                    .iter()
                    .filter(|e| e.kind == EventKind::Fire)
                    .map(|e| e.tick),
            );
        }
        assert!(
            !fires.contains(&10),
            "fired at t=1.0 while suppressed: {fires:?}"
        );
        assert_eq!(fires.first(), Some(&20));
    }
}
