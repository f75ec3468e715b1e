#![allow(dead_code)]

use std::collections::BTreeMap;
use tacsim_core::geom::Circle;
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

pub fn bomber(id: &str, x: f64, y: f64, speed: f64, range: f64, ammo: u32) -> EntityState {
    EntityState::new(
        id,
        Side::PlanExecuting,
        EntityClass::Bomber,
        Vec2::new(x, y),
        100.0,
    )
    .with_speed(speed)
    .with_weapon(weapon("agm", 1.0, range, 1.0, 100.0, ammo))
}

pub fn fighter(id: &str, x: f64, y: f64, speed: f64) -> EntityState {
    EntityState::new(
        id,
        Side::PlanExecuting,
        EntityClass::Fighter,
        Vec2::new(x, y),
        60.0,
    )
    .with_speed(speed)
    .with_weapon(weapon("gun", 0.7, 22.0, 0.5, 15.0, 24))
}

pub fn aat(id: &str, x: f64, y: f64) -> EntityState {
    EntityState::new(
        id,
        Side::Opponent,
        EntityClass::AntiAirThreat,
        Vec2::new(x, y),
        80.0,
    )
    .with_weapon(weapon("sam", 0.5, 30.0, 1.0, 35.0, 30))
}

pub fn command_center(x: f64, y: f64) -> EntityState {
    EntityState::new(
        "CC",
        Side::Opponent,
        EntityClass::CommandCenter,
        Vec2::new(x, y),
        100.0,
    )
}

pub fn scenario(entities: Vec<EntityState>, constraint_set: ConstraintSet) -> Scenario {
    Scenario {
        name: "test".into(),
        map_width: 260.0,
        map_height: 160.0,
        entities,
        core_target_id: "CC".into(),
        constraint_set,
        difficulty: Default::default(),
        sim_config: SimConfig::default(),
    }
    .validated()
    .expect("test scenario is valid")
}

pub fn zone(x: f64, y: f64, r: f64) -> Circle {
    Circle {
        center: Vec2::new(x, y),
        radius: r,
    }
}

/// Plan with the given actions in the given order and no trajectories.
pub fn plan(actions: Vec<AtomicAction>) -> CandidatePlan {
    CandidatePlan {
        plan_id: "p".into(),
        actions,
        planned_trajectories: BTreeMap::new(),
        metadata: BTreeMap::new(),
    }
}
