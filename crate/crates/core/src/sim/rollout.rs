//! One seeded end-to-end run of a plan against an opponent policy.

use super::engine::{
    check_termination, step, FailureReason, GlobalState, StaleAction, Termination,
};
use super::event::{Event, EventKind};
use super::export::log_hash;
use super::rng::{RngStream, SeedInfo};
use crate::geom::Vec2;
use crate::opponents::{OpponentFault, OpponentPolicy};
use crate::plan::{AtomicAction, CandidatePlan};
use crate::scenario::{EntityClass, Scenario, Side, ValueClass};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    Failure,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SideCounts {
    pub plan_executing: u32,
    pub opponent: u32,
}

impl SideCounts {
    pub fn get(&self, side: Side) -> u32 {
        match side {
            Side::PlanExecuting => self.plan_executing,
            Side::Opponent => self.opponent,
        }
    }

    fn add(&mut self, side: Side, n: u32) {
        match side {
            Side::PlanExecuting => self.plan_executing += n,
            Side::Opponent => self.opponent += n,
        }
    }
}

/// Per-tick samples of one entity; every vector has `end_tick + 1` entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntityTrack {
    pub entity_id: String,
    pub side: Side,
    pub class: EntityClass,
    pub value_class: ValueClass,
    pub positions: Vec<Vec2>,
    pub health: Vec<f64>,
    pub ammo: Vec<u32>,
    pub suppressed: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RolloutRecord {
    pub seed: SeedInfo,
    pub plan_id: String,
    pub opponent: String,
    pub scenario_digest: String,
    pub outcome: Outcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure_reason: Option<FailureReason>,
    pub end_tick: u64,
    pub dt: f64,
    pub events: Vec<Event>,
    pub tracks: Vec<EntityTrack>,
    pub initial_counts: SideCounts,
    pub ammo_spent: SideCounts,
    pub entities_lost: SideCounts,
    #[serde(default)]
    pub stale_actions: Vec<StaleAction>,
    /// Opponent actions the policy dropped (e.g. invalid adapter output).
    #[serde(default)]
    pub opponent_faults: Vec<String>,
    pub log_hash: String,
}

impl RolloutRecord {
    pub fn track(&self, entity_id: &str) -> Option<&EntityTrack> {
        self.tracks.iter().find(|t| t.entity_id == entity_id)
    }

    pub fn end_time(&self) -> f64 {
        self.end_tick as f64 * self.dt
    }

    /// Time of the core target's destruction, if it happened.
    pub fn kill_time(&self, core_target_id: &str) -> Option<f64> {
        self.events
            .iter()
            .find(|e| e.kind == EventKind::Destroyed && e.actor_id == core_target_id)
            .map(|e| e.tick as f64 * self.dt)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RolloutError {
    #[error("opponent fault at tick {tick}: {fault}")]
    OpponentFault { tick: u64, fault: OpponentFault },
}

/// Actions bucketed by the step that delivers them. An action
/// scheduled for tick `j` is delivered by the step that produces tick `j`, so
/// a launch at `t` resolves against positions at `t`; tick-0 actions ride the
/// first step.
pub fn delivery_buckets(actions: &[AtomicAction], scenario: &Scenario) -> Vec<Vec<AtomicAction>> {
    let horizon = scenario.sim_config.horizon_ticks() as usize;
    let mut buckets = vec![Vec::new(); horizon + 1];
    let mut actions = actions.to_vec();
    actions.sort_by(|a, b| a.schedule_cmp(b));
    for a in actions {
        let tick = (scenario.sim_config.tick_of(a.t_start) as usize).clamp(1, horizon);
        buckets[tick].push(a);
    }
    buckets
}

fn push_samples(tracks: &mut [EntityTrack], state: &GlobalState) {
    for (track, e) in tracks.iter_mut().zip(&state.entities) {
        track.positions.push(e.position);
        track.health.push(e.health);
        track.ammo.push(e.ammo);
        track.suppressed.push(e.is_suppressed(state.time));
    }
}

/// Execute `plan` exactly as scheduled while `opponent` reacts each tick to
/// the full state history. The engine draws from stream 0 of the seed and the
/// policy is reset with stream 1.
pub fn run_rollout(
    scenario: &Scenario,
    plan: &CandidatePlan,
    opponent: &mut dyn OpponentPolicy,
    seed: SeedInfo,
) -> Result<RolloutRecord, RolloutError> {
    let mut rng = RngStream::from_seed_info(seed);
    opponent.reset(SeedInfo {
        base_seed: seed.base_seed,
        rollout_index: seed.rollout_index + 1,
    });
    let buckets = delivery_buckets(&plan.actions, scenario);

    let initial = GlobalState::initial(scenario);
    let mut tracks: Vec<EntityTrack> = initial
        .entities
        .iter()
        .map(|e| EntityTrack {
            entity_id: e.id.clone(),
            side: e.side,
            class: e.class,
            value_class: e.value_class,
            positions: Vec::new(),
            health: Vec::new(),
            ammo: Vec::new(),
            suppressed: Vec::new(),
        })
        .collect();
    push_samples(&mut tracks, &initial);

    let mut history = vec![initial];
    let mut events = Vec::new();
    let mut stale_actions = Vec::new();
    let mut opponent_faults = Vec::new();
    let termination = loop {
        let state = history.last().expect("history is never empty");
        let verdict = check_termination(state, scenario);
        if verdict != Termination::Continue {
            break verdict;
        }
        let red =
            opponent
                .decide(&history, scenario)
                .map_err(|fault| RolloutError::OpponentFault {
                    tick: state.tick,
                    fault,
                })?;
        opponent_faults.extend(opponent.drain_faults());
        let next_tick = state.tick as usize + 1;
        let blue = buckets.get(next_tick).map(Vec::as_slice).unwrap_or(&[]);
        let out = step(state, blue, &red, scenario, &mut rng);
        events.extend(out.state.transient_events.iter().cloned());
        stale_actions.extend(out.stale);
        push_samples(&mut tracks, &out.state);
        history.push(out.state);
    };

    let first = &history[0];
    let last = history.last().expect("history is never empty");
    let mut initial_counts = SideCounts::default();
    let mut ammo_spent = SideCounts::default();
    let mut entities_lost = SideCounts::default();
    for (a, b) in first.entities.iter().zip(&last.entities) {
        initial_counts.add(a.side, 1);
        ammo_spent.add(a.side, a.ammo - b.ammo);
        if a.is_alive() && !b.is_alive() {
            entities_lost.add(a.side, 1);
        }
    }
    let (outcome, failure_reason) = match termination {
        Termination::Success => (Outcome::Success, None),
        Termination::Failure(r) => (Outcome::Failure, Some(r)),
        Termination::Continue => unreachable!("loop exits only on a terminal verdict"),
    };
    Ok(RolloutRecord {
        seed,
        plan_id: plan.plan_id.clone(),
        opponent: opponent.name().to_string(),
        scenario_digest: scenario.digest(),
        outcome,
        failure_reason,
        end_tick: last.tick,
        dt: scenario.sim_config.dt,
        log_hash: log_hash(&events),
        events,
        tracks,
        initial_counts,
        ammo_spent,
        entities_lost,
        stale_actions,
        opponent_faults,
    })
}
