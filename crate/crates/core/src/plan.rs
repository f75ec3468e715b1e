//! Candidate plans, atomic actions and commander intent.

use crate::geom::Vec2;
use crate::scenario::{ConstraintSet, EntityClass, Scenario, ScenarioError, Side};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAction", into = "RawAction")]
pub struct AtomicAction {
    pub actor_id: String,
    /// Scheduled time in seconds.
    pub t_start: f64,
    pub kind: ActionKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ActionKind {
    MoveTo { waypoint: Vec2, speed: f64 },
    Launch { weapon: String, target_id: String },
    Suppress { target_id: String, duration: f64 },
    Escort { ally_id: String, offset: Vec2 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
enum KindTag {
    #[serde(rename = "MOVE_TO")]
    MoveTo,
    #[serde(rename = "LAUNCH")]
    Launch,
    #[serde(rename = "SUPPRESS")]
    Suppress,
    #[serde(rename = "ESCORT")]
    Escort,
}

/// Flat wire form: `{actor_id, t_start, kind, ...kind-specific fields}`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAction {
    actor_id: String,
    t_start: f64,
    kind: KindTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    waypoint: Option<Vec2>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    speed: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weapon: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    duration: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ally_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    offset: Option<Vec2>,
}

impl TryFrom<RawAction> for AtomicAction {
    type Error = String;

    fn try_from(r: RawAction) -> Result<Self, String> {
        fn need<T>(v: Option<T>, field: &str, kind: &str) -> Result<T, String> {
            v.ok_or_else(|| format!("{kind} action requires field `{field}`"))
        }
        let stray = |allowed: &[&str]| -> Result<(), String> {
            let present = [
                ("waypoint", r.waypoint.is_some()),
                ("speed", r.speed.is_some()),
                ("weapon", r.weapon.is_some()),
                ("target_id", r.target_id.is_some()),
                ("duration", r.duration.is_some()),
                ("ally_id", r.ally_id.is_some()),
                ("offset", r.offset.is_some()),
            ];
            match present
                .iter()
                .find(|(name, set)| *set && !allowed.contains(name))
            {
                Some((name, _)) => Err(format!("field `{name}` is not valid for this action kind")),
                None => Ok(()),
            }
        };
        let kind = match r.kind {
            KindTag::MoveTo => {
                stray(&["waypoint", "speed"])?;
                ActionKind::MoveTo {
                    waypoint: need(r.waypoint, "waypoint", "MOVE_TO")?,
                    speed: need(r.speed, "speed", "MOVE_TO")?,
                }
            }
            KindTag::Launch => {
                stray(&["weapon", "target_id"])?;
                ActionKind::Launch {
                    weapon: need(r.weapon.clone(), "weapon", "LAUNCH")?,
                    target_id: need(r.target_id.clone(), "target_id", "LAUNCH")?,
                }
            }
            KindTag::Suppress => {
                stray(&["target_id", "duration"])?;
                ActionKind::Suppress {
                    target_id: need(r.target_id.clone(), "target_id", "SUPPRESS")?,
                    duration: need(r.duration, "duration", "SUPPRESS")?,
                }
            }
            KindTag::Escort => {
                stray(&["ally_id", "offset"])?;
                ActionKind::Escort {
                    ally_id: need(r.ally_id.clone(), "ally_id", "ESCORT")?,
                    offset: need(r.offset, "offset", "ESCORT")?,
                }
            }
        };
        Ok(AtomicAction {
            actor_id: r.actor_id,
            t_start: r.t_start,
            kind,
        })
    }
}

impl From<AtomicAction> for RawAction {
    fn from(a: AtomicAction) -> Self {
        let mut r = RawAction {
            actor_id: a.actor_id,
            t_start: a.t_start,
            kind: KindTag::MoveTo,
            waypoint: None,
            speed: None,
            weapon: None,
            target_id: None,
            duration: None,
            ally_id: None,
            offset: None,
        };
        match a.kind {
            ActionKind::MoveTo { waypoint, speed } => {
                r.waypoint = Some(waypoint);
                r.speed = Some(speed);
            }
            ActionKind::Launch { weapon, target_id } => {
                r.kind = KindTag::Launch;
                r.weapon = Some(weapon);
                r.target_id = Some(target_id);
            }
            ActionKind::Suppress {
                target_id,
                duration,
            } => {
                r.kind = KindTag::Suppress;
                r.target_id = Some(target_id);
                r.duration = Some(duration);
            }
            ActionKind::Escort { ally_id, offset } => {
                r.kind = KindTag::Escort;
                r.ally_id = Some(ally_id);
                r.offset = Some(offset);
            }
        }
        r
    }
}

impl AtomicAction {
    pub fn move_to(actor: &str, t: f64, waypoint: Vec2, speed: f64) -> Self {
        AtomicAction {
            actor_id: actor.into(),
            t_start: t,
            kind: ActionKind::MoveTo { waypoint, speed },
        }
    }

    pub fn launch(actor: &str, t: f64, weapon: &str, target: &str) -> Self {
        AtomicAction {
            actor_id: actor.into(),
            t_start: t,
            kind: ActionKind::Launch {
                weapon: weapon.into(),
                target_id: target.into(),
            },
        }
    }

    pub fn suppress(actor: &str, t: f64, target: &str, duration: f64) -> Self {
        AtomicAction {
            actor_id: actor.into(),
            t_start: t,
            kind: ActionKind::Suppress {
                target_id: target.into(),
                duration,
            },
        }
    }

    pub fn escort(actor: &str, t: f64, ally: &str, offset: Vec2) -> Self {
        AtomicAction {
            actor_id: actor.into(),
            t_start: t,
            kind: ActionKind::Escort {
                ally_id: ally.into(),
                offset,
            },
        }
    }

    pub fn is_launch(&self) -> bool {
        matches!(self.kind, ActionKind::Launch { .. })
    }

    /// Entity this action is aimed at, if any.
    pub fn target_id(&self) -> Option<&str> {
        match &self.kind {
            ActionKind::Launch { target_id, .. } | ActionKind::Suppress { target_id, .. } => {
                Some(target_id)
            }
            ActionKind::Escort { ally_id, .. } => Some(ally_id),
            ActionKind::MoveTo { .. } => None,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            ActionKind::MoveTo { .. } => "MOVE_TO",
            ActionKind::Launch { .. } => "LAUNCH",
            ActionKind::Suppress { .. } => "SUPPRESS",
            ActionKind::Escort { .. } => "ESCORT",
        }
    }

    /// Plan ordering: by time, then actor.
    pub fn schedule_cmp(&self, other: &Self) -> Ordering {
        self.t_start
            .total_cmp(&other.t_start)
            .then_with(|| self.actor_id.cmp(&other.actor_id))
    }
}

/// Timestamped actions for the plan-executing side plus the trajectory the
/// planner expects each of its entities to follow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidatePlan {
    pub plan_id: String,
    pub actions: Vec<AtomicAction>,
    /// Planned position per plan-executing entity at every tick `0..=horizon`.
    #[serde(rename = "trajectories")]
    pub planned_trajectories: BTreeMap<String, Vec<Vec2>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
}

impl CandidatePlan {
    /// Stable sort of actions into schedule order.
    pub fn sort_actions(&mut self) {
        self.actions.sort_by(|a, b| a.schedule_cmp(b));
    }

    pub fn from_json_str(text: &str) -> Result<Self, ScenarioError> {
        crate::scenario::parse_json(text)
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        Self::from_json_str(&crate::scenario::read_text(path)?)
    }

    pub fn to_canonical_json(&self) -> String {
        crate::canonical::to_string(self).expect("plan serializes")
    }

    pub fn digest(&self) -> String {
        crate::canonical::digest(self).expect("plan serializes")
    }
}

/// Structural problems found before semantic validation.
#[derive(Debug, Clone, PartialEq)]
pub enum PlanDefect {
    UnknownActor(String),
    /// The actor exists but does not belong to the plan-executing side.
    ForeignActor(String),
    UnknownTarget {
        actor_id: String,
        target_id: String,
    },
    UnknownWeapon {
        actor_id: String,
        weapon: String,
    },
    ActionsUnsorted {
        index: usize,
    },
    NegativeTime {
        actor_id: String,
        t_start: f64,
    },
    ActionBeyondHorizon {
        actor_id: String,
        t_start: f64,
    },
    NonFiniteValue {
        index: usize,
    },
    MissingTrajectory(String),
    TrajectoryLength {
        entity_id: String,
        expected: usize,
        found: usize,
    },
    UnknownTrajectoryEntity(String),
}

/// Check references, ordering, time bounds and trajectory coverage.
pub fn validate_plan_shape(plan: &CandidatePlan, scenario: &Scenario) -> Vec<PlanDefect> {
    let mut defects = Vec::new();
    let horizon = scenario.sim_config.horizon;
    for (i, a) in plan.actions.iter().enumerate() {
        match scenario.entity(&a.actor_id) {
            None => defects.push(PlanDefect::UnknownActor(a.actor_id.clone())),
            Some(e) if e.side != Side::PlanExecuting => {
                defects.push(PlanDefect::ForeignActor(a.actor_id.clone()))
            }
            Some(e) => {
                if let ActionKind::Launch { weapon, .. } = &a.kind {
                    if e.weapon.as_ref().map(|w| &w.name) != Some(weapon) {
                        defects.push(PlanDefect::UnknownWeapon {
                            actor_id: a.actor_id.clone(),
                            weapon: weapon.clone(),
                        });
                    }
                }
            }
        }
        if let Some(target) = a.target_id() {
            if scenario.entity(target).is_none() {
                defects.push(PlanDefect::UnknownTarget {
                    actor_id: a.actor_id.clone(),
                    target_id: target.to_string(),
                });
            }
        }
        let finite = a.t_start.is_finite()
            && match &a.kind {
                ActionKind::MoveTo { waypoint, speed } => waypoint.is_finite() && speed.is_finite(),
                ActionKind::Suppress { duration, .. } => duration.is_finite(),
                ActionKind::Escort { offset, .. } => offset.is_finite(),
                ActionKind::Launch { .. } => true,
            };
        if !finite {
            defects.push(PlanDefect::NonFiniteValue { index: i });
            continue;
        }
        if a.t_start < 0.0 {
            defects.push(PlanDefect::NegativeTime {
                actor_id: a.actor_id.clone(),
                t_start: a.t_start,
            });
        }
        if a.t_start > horizon {
            defects.push(PlanDefect::ActionBeyondHorizon {
                actor_id: a.actor_id.clone(),
                t_start: a.t_start,
            });
        }
        if i > 0 && plan.actions[i - 1].schedule_cmp(a) == Ordering::Greater {
            defects.push(PlanDefect::ActionsUnsorted { index: i });
        }
    }
    let expected = scenario.sim_config.horizon_ticks() as usize + 1;
    for e in scenario.side(Side::PlanExecuting) {
        match plan.planned_trajectories.get(&e.id) {
            None => defects.push(PlanDefect::MissingTrajectory(e.id.clone())),
            Some(t) if t.len() != expected => defects.push(PlanDefect::TrajectoryLength {
                entity_id: e.id.clone(),
                expected,
                found: t.len(),
            }),
            Some(_) => {}
        }
    }
    for id in plan.planned_trajectories.keys() {
        if scenario.entity(id).map(|e| e.side) != Some(Side::PlanExecuting) {
            defects.push(PlanDefect::UnknownTrajectoryEntity(id.clone()));
        }
    }
    defects
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    #[default]
    DestroyCoreTarget,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorityWeights {
    pub w_success: f64,
    pub w_loss: f64,
    pub w_time: f64,
}

impl Default for PriorityWeights {
    fn default() -> Self {
        PriorityWeights {
            w_success: 1.0,
            w_loss: 0.5,
            w_time: 0.1,
        }
    }
}

/// Partial [`ConstraintSet`]; every present field replaces the scenario value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ammo_budget: Option<BTreeMap<String, u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed_limits: Option<BTreeMap<EntityClass, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub no_fly_zones: Option<Vec<crate::geom::Circle>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub launch_standoff: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_plan_duration: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_salvo_per_tick: Option<u32>,
}

impl ConstraintOverrides {
    pub fn apply(&self, base: &ConstraintSet) -> ConstraintSet {
        let mut c = base.clone();
        if let Some(v) = &self.ammo_budget {
            c.ammo_budget = v.clone();
        }
        if let Some(v) = &self.speed_limits {
            c.speed_limits = v.clone();
        }
        if let Some(v) = &self.no_fly_zones {
            c.no_fly_zones = v.clone();
        }
        if self.launch_standoff.is_some() {
            c.launch_standoff = self.launch_standoff;
        }
        if self.max_plan_duration.is_some() {
            c.max_plan_duration = self.max_plan_duration;
        }
        if let Some(v) = self.max_salvo_per_tick {
            c.max_salvo_per_tick = v;
        }
        c
    }
}

/// Structured commander intent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Intent {
    pub core_target_id: String,
    #[serde(default)]
    pub objective: Objective,
    #[serde(default)]
    pub priority_weights: PriorityWeights,
    #[serde(default)]
    pub hard_constraints: ConstraintOverrides,
}

impl Intent {
    pub fn destroy(core_target_id: &str) -> Self {
        Intent {
            core_target_id: core_target_id.into(),
            objective: Objective::DestroyCoreTarget,
            priority_weights: PriorityWeights::default(),
            hard_constraints: ConstraintOverrides::default(),
        }
    }

    pub fn check(&self) -> Result<(), ScenarioError> {
        let w = self.priority_weights;
        let all = [w.w_success, w.w_loss, w.w_time];
        if all.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(ScenarioError::Invariant {
                path: "$.priority_weights".into(),
                message: "priority weights must be non-negative".into(),
            });
        }
        if all.iter().all(|v| *v == 0.0) {
            return Err(ScenarioError::Invariant {
                path: "$.priority_weights".into(),
                message: "priority weights must not all be zero".into(),
            });
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self, ScenarioError> {
        let intent: Intent = crate::scenario::parse_json(text)?;
        intent.check()?;
        Ok(intent)
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        Self::from_json_str(&crate::scenario::read_text(path)?)
    }

    /// The scenario with this intent's hard constraints applied.
    pub fn constrain(&self, scenario: &Scenario) -> Scenario {
        let mut s = scenario.clone();
        s.constraint_set = self.hard_constraints.apply(&scenario.constraint_set);
        s
    }
}
