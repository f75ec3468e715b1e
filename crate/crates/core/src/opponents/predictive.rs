use super::nobrain::next_patrol_leg;
use super::{execution_time, launch, ready_shooters, OpponentFault, OpponentPolicy};
use crate::geom::{turn_angle, Vec2};
use crate::plan::AtomicAction;
use crate::scenario::{EntityClass, EntityState, Scenario, Side, ValueClass};
use crate::sim::{GlobalState, SeedInfo};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::f64::consts::PI;

/// Number of most recent observations used to estimate velocity.
const VELOCITY_WINDOW: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub entity_id: String,
    /// Stored index of the entity; used for deterministic tie-breaks.
    pub index: usize,
    pub value_class: ValueClass,
    pub current: Vec2,
    /// Positions at the next `h_pred` ticks.
    pub positions: Vec<Vec2>,
    /// `1 - turn/pi`, where `turn` is the heading change between the last two
    /// observed displacements; 1 for straight or stationary motion.
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionSet {
    pub h_pred: usize,
    pub entries: Vec<Prediction>,
}

impl PredictionSet {
    pub fn get(&self, entity_id: &str) -> Option<&Prediction> {
        self.entries.iter().find(|p| p.entity_id == entity_id)
    }
}

/// Constant-velocity extrapolation of every live plan-executing entity from
/// its last few observed positions, clamped to the map.
pub fn predict_trajectories(
    history: &[GlobalState],
    h_pred: usize,
    scenario: &Scenario,
) -> PredictionSet {
    let Some(state) = history.last() else {
        return PredictionSet {
            h_pred,
            entries: Vec::new(),
        };
    };
    let window = &history[history.len().saturating_sub(VELOCITY_WINDOW)..];
    let entries = state
        .alive(Side::PlanExecuting)
        .map(|(i, e)| {
            let observed: Vec<Vec2> = window.iter().map(|s| s.entities[i].position).collect();
            let steps = observed.len() - 1;
            let velocity = if steps == 0 {
                Vec2::ZERO
            } else {
                (observed[steps] - observed[0]) * (1.0 / steps as f64)
            };
            let confidence = if steps >= 2 {
                let turn = turn_angle(
                    observed[steps - 1] - observed[steps - 2],
                    observed[steps] - observed[steps - 1],
                );
                1.0 - turn / PI
            } else {
                1.0
            };
            let positions = (1..=h_pred)
                .map(|k| {
                    (e.position + velocity * k as f64)
                        .clamp_to(scenario.map_width, scenario.map_height)
                })
                .collect();
            Prediction {
                entity_id: e.id.clone(),
                index: i,
                value_class: e.value_class,
                current: e.position,
                positions,
                confidence,
            }
        })
        .collect();
    PredictionSet { h_pred, entries }
}

/// Targets ranked for one shooter, best first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetPriority {
    pub entries: Vec<(String, f64)>,
}

/// Score each predicted target by `value * max(1 - d/R)` over its current
/// and predicted positions within the shooter's range (0 if never in range).
/// High-value entities are worth `w_b`, ordinary ones `w_f`.
pub fn prioritize_targets(
    predictions: &PredictionSet,
    shooter: &EntityState,
    w_b: f64,
    w_f: f64,
) -> TargetPriority {
    let range = shooter.weapon.as_ref().map_or(0.0, |w| w.range);
    let mut scored: Vec<(usize, String, f64)> = predictions
        .entries
        .iter()
        .map(|p| {
            let value = match p.value_class {
                ValueClass::HighValue => w_b,
                ValueClass::Ordinary => w_f,
            };
            let best = std::iter::once(&p.current)
                .chain(&p.positions)
                .map(|q| q.dist(shooter.position))
                .filter(|d| range > 0.0 && *d <= range)
                .map(|d| 1.0 - d / range)
                .fold(0.0, f64::max);
            (p.index, p.entity_id.clone(), value * best)
        })
        .collect();
    scored.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)));
    TargetPriority {
        entries: scored.into_iter().map(|(_, id, s)| (id, s)).collect(),
    }
}

/// Predict, then allocate: each armed unit engages its best-scoring target
/// that will be in range at the next tick, and air patrols intercept the
/// most valuable plan-executing entity nobody is shooting at.
#[derive(Debug, Clone)]
pub struct Predictive {
    pub h_pred: usize,
    pub w_b: f64,
    pub w_f: f64,
}

impl Predictive {
    pub fn new(h_pred: usize, w_b: f64, w_f: f64) -> Self {
        Predictive {
            h_pred: h_pred.max(1),
            w_b,
            w_f,
        }
    }

    fn value(&self, v: ValueClass) -> f64 {
        match v {
            ValueClass::HighValue => self.w_b,
            ValueClass::Ordinary => self.w_f,
        }
    }
}

impl OpponentPolicy for Predictive {
    fn name(&self) -> &str {
        "predictive"
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
        let predictions = predict_trajectories(history, self.h_pred, scenario);
        if predictions.entries.is_empty() {
            return Ok(Vec::new());
        }
        let t = execution_time(state, scenario);
        let mut actions = Vec::new();
        let mut engaged = BTreeSet::new();
        for (_, shooter) in ready_shooters(state, scenario) {
            let range = shooter.weapon.as_ref().map_or(0.0, |w| w.range);
            let priority = prioritize_targets(&predictions, shooter, self.w_b, self.w_f);
            let choice = priority
                .entries
                .iter()
                .filter(|(_, score)| *score > 0.0)
                .find(|(id, _)| {
                    let p = predictions
                        .get(id)
                        .expect("priorities come from predictions");
                    p.positions[0].dist(shooter.position) <= range
                });
            if let Some((id, _)) = choice {
                engaged.insert(id.clone());
                actions.push(launch(shooter, t, id));
            }
        }

        let lead = (self.h_pred / 2).max(1) - 1;
        for (_, patrol) in state
            .alive(Side::Opponent)
            .filter(|(_, e)| e.class == EntityClass::AirPatrol && e.speed_max > 0.0)
        {
            let pick = |pool: &mut dyn Iterator<Item = &Prediction>| {
                pool.min_by(|a, b| {
                    self.value(b.value_class)
                        .total_cmp(&self.value(a.value_class))
                        .then(
                            a.current
                                .dist(patrol.position)
                                .total_cmp(&b.current.dist(patrol.position)),
                        )
                        .then(a.index.cmp(&b.index))
                })
                .cloned()
            };
            let quarry = pick(
                &mut predictions
                    .entries
                    .iter()
                    .filter(|p| !engaged.contains(&p.entity_id)),
            )
            .or_else(|| pick(&mut predictions.entries.iter()));
            match quarry {
                Some(q) => actions.push(AtomicAction::move_to(
                    &patrol.id,
                    t,
                    q.positions[lead],
                    patrol.speed_max,
                )),
                None => {
                    if let Some(w) = next_patrol_leg(patrol) {
                        actions.push(AtomicAction::move_to(&patrol.id, t, w, patrol.speed_max));
                    }
                }
            }
        }
        Ok(actions)
    }
}
