//! Built-in scenarios: an easy and a difficult template on the standard
//! 260 x 160 map, plus a deterministic suite of jittered variants.

use crate::geom::{Circle, Vec2};
use crate::scenario::{
    ConstraintSet, Difficulty, EntityClass, EntityState, Scenario, Side, SimConfig, WeaponSpec,
};
use crate::sim::RngStream;

fn weapon(
    name: &str,
    p_base: f64,
    range: f64,
    rof_base: f64,
    damage: f64,
    ammo: u32,
) -> WeaponSpec {
    WeaponSpec {
        name: name.into(),
        p_base,
        range,
        rof_base,
        damage,
        ammo_capacity: ammo,
    }
}

fn bomber(id: &str, x: f64, y: f64) -> EntityState {
    EntityState::new(
        id,
        Side::PlanExecuting,
        EntityClass::Bomber,
        Vec2::new(x, y),
        70.0,
    )
    .with_speed(20.0)
    .with_weapon(weapon("agm", 0.8, 25.0, 1.0, 50.0, 4))
}

fn fighter(id: &str, x: f64, y: f64) -> EntityState {
    EntityState::new(
        id,
        Side::PlanExecuting,
        EntityClass::Fighter,
        Vec2::new(x, y),
        60.0,
    )
    .with_speed(24.0)
    .with_weapon(weapon("gun", 0.7, 22.0, 0.5, 15.0, 24))
}

fn aat(id: &str, x: f64, y: f64) -> EntityState {
    EntityState::new(
        id,
        Side::Opponent,
        EntityClass::AntiAirThreat,
        Vec2::new(x, y),
        80.0,
    )
    .with_weapon(weapon("sam", 0.6, 30.0, 1.0, 35.0, 30))
}

fn missile_region(id: &str, x: f64, y: f64) -> EntityState {
    EntityState::new(
        id,
        Side::Opponent,
        EntityClass::MissileThreatRegion,
        Vec2::new(x, y),
        120.0,
    )
    .with_weapon(weapon("lrsam", 0.4, 45.0, 2.0, 50.0, 12))
}

fn air_patrol(id: &str, x: f64, y: f64, route: &[(f64, f64)]) -> EntityState {
    let mut e = EntityState::new(
        id,
        Side::Opponent,
        EntityClass::AirPatrol,
        Vec2::new(x, y),
        50.0,
    )
    .with_speed(12.0)
    .with_weapon(weapon("aam", 0.5, 18.0, 1.0, 35.0, 12));
    e.patrol_route = route.iter().map(|&(x, y)| Vec2::new(x, y)).collect();
    e
}

fn command_center(x: f64, y: f64) -> EntityState {
    EntityState::new(
        "CC",
        Side::Opponent,
        EntityClass::CommandCenter,
        Vec2::new(x, y),
        100.0,
    )
}

fn assemble(
    name: &str,
    difficulty: Difficulty,
    entities: Vec<EntityState>,
    no_fly_zones: Vec<Circle>,
) -> Scenario {
    let constraint_set = ConstraintSet {
        no_fly_zones,
        launch_standoff: Some(18.0),
        ..ConstraintSet::default()
    };
    Scenario {
        name: name.into(),
        map_width: 260.0,
        map_height: 160.0,
        entities,
        core_target_id: "CC".into(),
        constraint_set,
        difficulty,
        sim_config: SimConfig::default(),
    }
    .validated()
    .expect("built-in template is valid")
}

/// Two bombers with two fighters against a thin air defence.
pub fn easy() -> Scenario {
    assemble(
        "easy",
        Difficulty::Easy,
        vec![
            bomber("B-1", 20.0, 72.0),
            bomber("B-2", 20.0, 88.0),
            fighter("F-1", 28.0, 60.0),
            fighter("F-2", 28.0, 100.0),
            command_center(220.0, 80.0),
            aat("AAT-1", 120.0, 84.0),
            aat("AAT-2", 196.0, 58.0),
            missile_region("MTR-1", 160.0, 138.0),
            air_patrol("AP-1", 175.0, 30.0, &[(175.0, 30.0), (175.0, 70.0)]),
        ],
        vec![Circle {
            center: Vec2::new(80.0, 130.0),
            radius: 15.0,
        }],
    )
}

/// Layered defence around the command center and a no-fly zone forcing a
/// choice of corridor.
pub fn difficult() -> Scenario {
    assemble(
        "difficult",
        Difficulty::Difficult,
        vec![
            bomber("B-1", 20.0, 72.0),
            bomber("B-2", 20.0, 88.0),
            fighter("F-1", 28.0, 60.0),
            fighter("F-2", 28.0, 100.0),
            command_center(220.0, 80.0),
            aat("AAT-1", 110.0, 70.0),
            aat("AAT-2", 150.0, 105.0),
            aat("AAT-3", 205.0, 100.0),
            missile_region("MTR-1", 165.0, 40.0),
            air_patrol("AP-1", 185.0, 120.0, &[(185.0, 120.0), (185.0, 60.0)]),
            air_patrol("AP-2", 140.0, 30.0, &[(140.0, 30.0), (100.0, 30.0)]),
        ],
        vec![Circle {
            center: Vec2::new(75.0, 110.0),
            radius: 18.0,
        }],
    )
}

/// `n` scenarios alternating easy and difficult, each with opponent
/// positions jittered by up to 6 map units from a fixed seed.
pub fn suite(n: usize) -> Vec<Scenario> {
    (0..n)
        .map(|i| {
            let mut s = if i % 2 == 0 { easy() } else { difficult() };
            let mut rng = RngStream::new(0x5eed, i as u64);
            let (w, h) = (s.map_width, s.map_height);
            for e in s.entities.iter_mut().filter(|e| e.side == Side::Opponent) {
                let dx = (rng.uniform() - 0.5) * 12.0;
                let dy = (rng.uniform() - 0.5) * 12.0;
                let shift = Vec2::new(dx, dy);
                e.position = (e.position + shift).clamp_to(w, h);
                for p in e.patrol_route.iter_mut() {
                    *p = (*p + shift).clamp_to(w, h);
                }
            }
            s.name = format!(
                "suite-{i:02}-{}",
                if i % 2 == 0 { "easy" } else { "difficult" }
            );
            s.validated().expect("jittered template stays valid")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn templates_are_valid_and_distinct() {
        let s = suite(10);
        assert_eq!(s.len(), 10);
        let digests: std::collections::BTreeSet<_> = s.iter().map(|x| x.digest()).collect();
        assert_eq!(digests.len(), 10);
        assert_eq!(suite(10), s);
        assert_eq!(easy().difficulty, Difficulty::Easy);
        assert_eq!(difficult().difficulty, Difficulty::Difficult);
    }
}
