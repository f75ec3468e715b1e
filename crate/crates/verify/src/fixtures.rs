//! Hand-built rollout records for unit tests.

use tacsim_core::sim::{EntityTrack, Event, EventKind, Outcome, RolloutRecord, SeedInfo, SideCounts};
use tacsim_core::{EntityClass, Side, Vec2};

pub fn track(id: &str, side: Side, class: EntityClass, positions: Vec<Vec2>) -> EntityTrack {
    let n = positions.len();
    EntityTrack {
        entity_id: id.into(),
        side,
        class,
        value_class: class.default_value_class(),
        positions,
        health: vec![100.0; n],
        ammo: vec![4; n],
        suppressed: vec![false; n],
    }
}

pub fn record(outcome: Outcome, lost: u32, ammo: u32) -> RolloutRecord {
    RolloutRecord {
        seed: SeedInfo::from_seed(1),
        plan_id: "p".into(),
        opponent: "nobrain".into(),
        scenario_digest: "d".into(),
        outcome,
        failure_reason: None,
        end_tick: 0,
        dt: 0.1,
        events: Vec::new(),
        tracks: Vec::new(),
        initial_counts: SideCounts { plan_executing: 4, opponent: 3 },
        ammo_spent: SideCounts { plan_executing: ammo, opponent: 0 },
        entities_lost: SideCounts { plan_executing: lost, opponent: 0 },
        stale_actions: Vec::new(),
        opponent_faults: Vec::new(),
        log_hash: String::new(),
    }
}

pub fn event(tick: u64, kind: EventKind, actor: &str, target: &str) -> Event {
    Event::new(tick, kind, actor, Some(target))
}

use std::collections::BTreeMap;
use tacsim_core::scenario::{ConstraintSet, SimConfig};
use tacsim_core::{AtomicAction, CandidatePlan, EntityState, Scenario, WeaponSpec};

/// One bomber flying straight at the command center, optionally past an
/// air-defence site sitting on its path.
pub fn strike_scenario(with_threat: bool) -> Scenario {
    let mut entities = vec![
        EntityState::new("B", Side::PlanExecuting, EntityClass::Bomber, Vec2::new(20.0, 80.0), 100.0)
            .with_speed(20.0)
            .with_weapon(WeaponSpec { name: "agm".into(), p_base: 1.0, range: 25.0, rof_base: 1.0, damage: 100.0, ammo_capacity: 4 }),
        EntityState::new("CC", Side::Opponent, EntityClass::CommandCenter, Vec2::new(200.0, 80.0), 100.0),
    ];
    if with_threat {
        entities.push(
            EntityState::new("AAT", Side::Opponent, EntityClass::AntiAirThreat, Vec2::new(110.0, 80.0), 80.0).with_weapon(WeaponSpec {
                name: "sam".into(),
                p_base: 0.3,
                range: 30.0,
                rof_base: 1.0,
                damage: 10.0,
                ammo_capacity: 30,
            }),
        );
    }
    Scenario {
        name: "strike".into(),
        map_width: 260.0,
        map_height: 160.0,
        entities,
        core_target_id: "CC".into(),
        constraint_set: ConstraintSet::default(),
        difficulty: Default::default(),
        sim_config: SimConfig::default(),
    }
    .validated()
    .expect("fixture scenario is valid")
}

/// Fly to 20 units short of the target, then launch once per second.
pub fn strike_plan(id: &str, scenario: &Scenario, launches: usize) -> CandidatePlan {
    let mut actions = vec![AtomicAction::move_to("B", 0.0, Vec2::new(180.0, 80.0), 20.0)];
    for i in 0..launches {
        actions.push(AtomicAction::launch("B", 9.0 + i as f64, "agm", "CC"));
    }
    let planned_trajectories = tacsim_planner::planned_trajectories(&actions, scenario);
    CandidatePlan { plan_id: id.into(), actions, planned_trajectories, metadata: BTreeMap::new() }
}
