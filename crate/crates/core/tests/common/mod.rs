#![allow(dead_code)]

use std::collections::BTreeMap;
use tacsim_core::scenario::{ConstraintSet, SimConfig};
use tacsim_core::{
    AtomicAction, CandidatePlan, EntityClass, EntityState, Scenario, Side, Vec2, WeaponSpec,
};

pub fn weapon(name: &str, p_base: f64, range: f64, rof: f64, damage: f64, ammo: u32) -> WeaponSpec {
    WeaponSpec {
        name: name.into(),
        p_base,
        range,
        rof_base: rof,
        damage,
        ammo_capacity: ammo,
    }
}

pub fn entity(
    id: &str,
    side: Side,
    class: EntityClass,
    x: f64,
    y: f64,
    health: f64,
) -> EntityState {
    EntityState::new(id, side, class, Vec2::new(x, y), health)
}

pub fn scenario(entities: Vec<EntityState>, sim_config: SimConfig) -> Scenario {
    Scenario {
        name: "test".into(),
        map_width: 260.0,
        map_height: 160.0,
        entities,
        core_target_id: "CC".into(),
        constraint_set: ConstraintSet::default(),
        difficulty: Default::default(),
        sim_config,
    }
    .validated()
    .expect("test scenario is valid")
}

/// Plan with the given actions and stationary placeholder trajectories.
pub fn plan(scenario: &Scenario, actions: Vec<AtomicAction>) -> CandidatePlan {
    let n = scenario.sim_config.horizon_ticks() as usize + 1;
    let planned_trajectories: BTreeMap<String, Vec<Vec2>> = scenario
        .side(Side::PlanExecuting)
        .map(|e| (e.id.clone(), vec![e.position; n]))
        .collect();
    let mut p = CandidatePlan {
        plan_id: "test-plan".into(),
        actions,
        planned_trajectories,
        metadata: BTreeMap::new(),
    };
    p.sort_actions();
    p
}
