use super::{execution_time, launch, ready_shooters, OpponentFault, OpponentPolicy};
use crate::plan::AtomicAction;
use crate::scenario::{EntityClass, EntityState, Scenario, Side};
use crate::sim::{GlobalState, SeedInfo};

/// Static script: every armed unit shoots the nearest plan-executing entity
/// in range whenever it may fire, and air patrols fly their waypoint loops.
#[derive(Debug, Default, Clone)]
pub struct NoBrain;

/// Next leg of a patrol loop: after reaching waypoint `i` head for `i + 1`,
/// otherwise (re)join the loop at its first waypoint.
pub(crate) fn next_patrol_leg(entity: &EntityState) -> Option<crate::geom::Vec2> {
    let route = &entity.patrol_route;
    if route.is_empty() || entity.order.is_some() {
        return None;
    }
    match route.iter().position(|w| w.dist(entity.position) < 1e-9) {
        Some(i) => Some(route[(i + 1) % route.len()]),
        None => Some(route[0]),
    }
}

impl OpponentPolicy for NoBrain {
    fn name(&self) -> &str {
        "nobrain"
    }

    fn reset(&mut self, _seed: SeedInfo) {}

    fn decide(
        &mut self,
        history: &[GlobalState],
        scenario: &Scenario,
    ) -> Result<Vec<AtomicAction>, OpponentFault> {
        let Some(state) = history.last() else {
            return Ok(Vec::new());
        };
        let t = execution_time(state, scenario);
        let mut actions = Vec::new();
        for (_, shooter) in ready_shooters(state, scenario) {
            let range = shooter.weapon.as_ref().map_or(0.0, |w| w.range);
            let nearest = state
                .alive(Side::PlanExecuting)
                .map(|(i, b)| (b.position.dist(shooter.position), i, b))
                .filter(|(d, _, _)| *d <= range)
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            if let Some((_, _, target)) = nearest {
                actions.push(launch(shooter, t, &target.id));
            }
        }
        for (_, e) in state
            .alive(Side::Opponent)
            .filter(|(_, e)| e.class == EntityClass::AirPatrol)
        {
            if let Some(w) = next_patrol_leg(e) {
                actions.push(AtomicAction::move_to(&e.id, t, w, e.speed_max));
            }
        }
        Ok(actions)
    }
}
