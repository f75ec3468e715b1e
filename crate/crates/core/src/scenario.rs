//! Battlefield definition: entities, weapons, constraints and simulation
//! parameters, plus loading with structural and invariant validation.

use crate::canonical;
use crate::geom::{Circle, Vec2};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// The side that strictly executes the candidate plan.
    PlanExecuting,
    Opponent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityClass {
    Bomber,
    Fighter,
    CommandCenter,
    AntiAirThreat,
    MissileThreatRegion,
    AirPatrol,
}

impl EntityClass {
    pub fn default_value_class(self) -> ValueClass {
        match self {
            EntityClass::Bomber | EntityClass::CommandCenter => ValueClass::HighValue,
            _ => ValueClass::Ordinary,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EntityClass::Bomber => "bomber",
            EntityClass::Fighter => "fighter",
            EntityClass::CommandCenter => "command_center",
            EntityClass::AntiAirThreat => "anti_air_threat",
            EntityClass::MissileThreatRegion => "missile_threat_region",
            EntityClass::AirPatrol => "air_patrol",
        }
    }
}

impl fmt::Display for EntityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueClass {
    HighValue,
    Ordinary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Difficulty {
    #[default]
    Easy,
    Difficult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeaponSpec {
    pub name: String,
    pub p_base: f64,
    /// Maximum effective range in map units.
    pub range: f64,
    /// Base firing interval, seconds per shot.
    pub rof_base: f64,
    pub damage: f64,
    pub ammo_capacity: u32,
}

impl WeaponSpec {
    fn check(&self, path: &str) -> Result<(), ScenarioError> {
        if !(0.0..=1.0).contains(&self.p_base) {
            return Err(invariant(
                format!("{path}.p_base"),
                "p_base must lie in [0, 1]",
            ));
        }
        if !(self.range > 0.0 && self.range.is_finite()) {
            return Err(invariant(format!("{path}.range"), "range must be > 0"));
        }
        if !(self.rof_base > 0.0 && self.rof_base.is_finite()) {
            return Err(invariant(
                format!("{path}.rof_base"),
                "rof_base must be > 0",
            ));
        }
        if !(self.damage > 0.0 && self.damage.is_finite()) {
            return Err(invariant(format!("{path}.damage"), "damage must be > 0"));
        }
        Ok(())
    }
}

/// Standing movement order of an entity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Order {
    MoveTo { waypoint: Vec2, speed: f64 },
    Escort { ally_id: String, offset: Vec2 },
}

/// Soft-kill task: keep the target suppressed until `until`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuppressTask {
    pub target_id: String,
    pub until: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "EntityFile", into = "EntityFile")]
pub struct EntityState {
    pub id: String,
    pub side: Side,
    pub class: EntityClass,
    pub position: Vec2,
    /// Radians, counter-clockwise from +x.
    pub heading: f64,
    pub speed_max: f64,
    pub health: f64,
    pub weapon: Option<WeaponSpec>,
    pub ammo: u32,
    pub suppressed_until: Option<f64>,
    pub last_fire_time: Option<f64>,
    pub value_class: ValueClass,
    /// Waypoint loop for scripted air patrols.
    pub patrol_route: Vec<Vec2>,
    pub order: Option<Order>,
    pub suppress_task: Option<SuppressTask>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntityFile {
    id: String,
    side: Side,
    class: EntityClass,
    position: Vec2,
    #[serde(default)]
    heading: f64,
    #[serde(default)]
    speed_max: f64,
    health: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weapon: Option<WeaponSpec>,
    #[serde(default)]
    ammo: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    suppressed_until: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    last_fire_time: Option<f64>,
    #[serde(default)]
    value_class: Option<ValueClass>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    patrol_route: Vec<Vec2>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    order: Option<Order>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    suppress_task: Option<SuppressTask>,
}

impl From<EntityFile> for EntityState {
    fn from(f: EntityFile) -> Self {
        EntityState {
            value_class: f
                .value_class
                .unwrap_or_else(|| f.class.default_value_class()),
            id: f.id,
            side: f.side,
            class: f.class,
            position: f.position,
            heading: f.heading,
            speed_max: f.speed_max,
            health: f.health,
            weapon: f.weapon,
            ammo: f.ammo,
            suppressed_until: f.suppressed_until,
            last_fire_time: f.last_fire_time,
            patrol_route: f.patrol_route,
            order: f.order,
            suppress_task: f.suppress_task,
        }
    }
}

impl From<EntityState> for EntityFile {
    fn from(e: EntityState) -> Self {
        EntityFile {
            id: e.id,
            side: e.side,
            class: e.class,
            position: e.position,
            heading: e.heading,
            speed_max: e.speed_max,
            health: e.health,
            weapon: e.weapon,
            ammo: e.ammo,
            suppressed_until: e.suppressed_until,
            last_fire_time: e.last_fire_time,
            value_class: Some(e.value_class),
            patrol_route: e.patrol_route,
            order: e.order,
            suppress_task: e.suppress_task,
        }
    }
}

impl EntityState {
    /// Minimal constructor; weapon-less, stationary, ordinary defaults.
    pub fn new(
        id: impl Into<String>,
        side: Side,
        class: EntityClass,
        position: Vec2,
        health: f64,
    ) -> Self {
        EntityState {
            id: id.into(),
            side,
            class,
            position,
            heading: 0.0,
            speed_max: 0.0,
            health,
            weapon: None,
            ammo: 0,
            suppressed_until: None,
            last_fire_time: None,
            value_class: class.default_value_class(),
            patrol_route: Vec::new(),
            order: None,
            suppress_task: None,
        }
    }

    pub fn with_weapon(mut self, weapon: WeaponSpec) -> Self {
        self.ammo = weapon.ammo_capacity;
        self.weapon = Some(weapon);
        self
    }

    pub fn with_speed(mut self, speed_max: f64) -> Self {
        self.speed_max = speed_max;
        self
    }

    pub fn is_alive(&self) -> bool {
        self.health > 0.0
    }

    pub fn is_suppressed(&self, now: f64) -> bool {
        self.suppressed_until.is_some_and(|until| now < until)
    }

    /// Check the per-entity invariants; `path` prefixes error locations.
    pub fn check(&self, path: &str, width: f64, height: f64) -> Result<(), ScenarioError> {
        if self.id.is_empty() {
            return Err(invariant(
                format!("{path}.id"),
                "entity id must be non-empty",
            ));
        }
        if !self.position.is_finite() {
            return Err(invariant(
                format!("{path}.position"),
                "position must be finite",
            ));
        }
        let p = self.position;
        if p.x < 0.0 || p.x > width || p.y < 0.0 || p.y > height {
            return Err(invariant(
                format!("{path}.position"),
                "position outside map bounds",
            ));
        }
        if !(self.health >= 0.0 && self.health.is_finite()) {
            return Err(invariant(
                format!("{path}.health"),
                "health must be a non-negative number",
            ));
        }
        if !(self.speed_max >= 0.0 && self.speed_max.is_finite()) {
            return Err(invariant(
                format!("{path}.speed_max"),
                "speed_max must be >= 0",
            ));
        }
        if !self.heading.is_finite() {
            return Err(invariant(
                format!("{path}.heading"),
                "heading must be finite",
            ));
        }
        match &self.weapon {
            Some(w) => {
                w.check(&format!("{path}.weapon"))?;
                if self.ammo > w.ammo_capacity {
                    return Err(invariant(
                        format!("{path}.ammo"),
                        "ammo exceeds weapon ammo_capacity",
                    ));
                }
            }
            None if self.ammo != 0 => {
                return Err(invariant(
                    format!("{path}.ammo"),
                    "ammo must be 0 without a weapon",
                ));
            }
            None => {}
        }
        for (i, wp) in self.patrol_route.iter().enumerate() {
            if !wp.is_finite() || wp.x < 0.0 || wp.x > width || wp.y < 0.0 || wp.y > height {
                return Err(invariant(
                    format!("{path}.patrol_route[{i}]"),
                    "patrol waypoint outside map bounds",
                ));
            }
        }
        Ok(())
    }
}

fn default_dt() -> f64 {
    0.1
}
fn default_horizon() -> f64 {
    20.0
}
fn default_mc() -> u32 {
    100
}
fn default_seeds() -> Vec<u64> {
    (1..=100).collect()
}
fn default_alpha() -> f64 {
    0.3
}
fn default_beta() -> f64 {
    0.7
}
fn default_gamma() -> f64 {
    2.0
}
fn default_lambda() -> f64 {
    0.5
}
fn default_tau() -> f64 {
    3.0
}

/// Engine parameters. Every field has a default, so `{}` is a valid config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_mc")]
    pub mc_repetitions: u32,
    #[serde(default = "default_seeds")]
    pub seed_list: Vec<u64>,
    /// Hit retained at maximum range.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Distance-gain share; `alpha + beta = 1`.
    #[serde(default = "default_beta")]
    pub beta: f64,
    /// Firing-interval multiplier while suppressed (> 1).
    #[serde(default = "default_gamma")]
    pub gamma_rof: f64,
    /// Hit-probability multiplier while suppressed (in (0, 1)).
    #[serde(default = "default_lambda")]
    pub lambda_hit: f64,
    /// Suppression duration in seconds.
    #[serde(default = "default_tau")]
    pub tau_sup: f64,
    /// When set, a soft-kill hit also applies weapon damage.
    #[serde(default)]
    pub suppress_damage: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all SimConfig fields have defaults")
    }
}

impl SimConfig {
    pub fn horizon_ticks(&self) -> u64 {
        (self.horizon / self.dt).round() as u64
    }

    /// Nearest tick index for a time in seconds.
    pub fn tick_of(&self, t: f64) -> u64 {
        (t / self.dt).round().max(0.0) as u64
    }

    pub fn time_of(&self, tick: u64) -> f64 {
        tick as f64 * self.dt
    }

    pub fn check(&self, path: &str) -> Result<(), ScenarioError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invariant(format!("{path}.dt"), "dt must be > 0"));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(invariant(format!("{path}.horizon"), "horizon must be > 0"));
        }
        let ratio = self.horizon / self.dt;
        if (ratio - ratio.round()).abs() > 1e-9 {
            return Err(invariant(
                format!("{path}.horizon"),
                "horizon/dt must be an integer number of ticks",
            ));
        }
        if ((self.alpha + self.beta) - 1.0).abs() > 1e-12 {
            return Err(invariant(
                format!("{path}.alpha"),
                "alpha+beta must equal 1",
            ));
        }
        if self.alpha < 0.0 || self.beta < 0.0 {
            return Err(invariant(
                format!("{path}.alpha"),
                "alpha and beta must be non-negative",
            ));
        }
        if !(self.gamma_rof > 1.0 && self.gamma_rof.is_finite()) {
            return Err(invariant(
                format!("{path}.gamma_rof"),
                "gamma_rof must be > 1",
            ));
        }
        if !(self.lambda_hit > 0.0 && self.lambda_hit < 1.0) {
            return Err(invariant(
                format!("{path}.lambda_hit"),
                "lambda_hit must lie in (0, 1)",
            ));
        }
        if !(self.tau_sup > 0.0 && self.tau_sup.is_finite()) {
            return Err(invariant(format!("{path}.tau_sup"), "tau_sup must be > 0"));
        }
        Ok(())
    }
}

fn default_salvo() -> u32 {
    2
}

/// Resource and physical limits plans must respect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSet {
    /// Launch budget per entity id; entities not listed are limited by their ammo.
    #[serde(default)]
    pub ammo_budget: BTreeMap<String, u32>,
    /// Speed cap per entity class, on top of each entity's own `speed_max`.
    #[serde(default)]
    pub speed_limits: BTreeMap<EntityClass, f64>,
    #[serde(default)]
    pub no_fly_zones: Vec<Circle>,
    /// Launches are planned no farther than this from their target.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub launch_standoff: Option<f64>,
    /// Latest allowed action time; defaults to the simulation horizon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_plan_duration: Option<f64>,
    #[serde(default = "default_salvo")]
    pub max_salvo_per_tick: u32,
}

impl Default for ConstraintSet {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all ConstraintSet fields have defaults")
    }
}

impl ConstraintSet {
    pub fn check(&self, path: &str) -> Result<(), ScenarioError> {
        for (class, v) in &self.speed_limits {
            if !(*v >= 0.0) {
                return Err(invariant(
                    format!("{path}.speed_limits.{class}"),
                    "speed limit must be >= 0",
                ));
            }
        }
        for (i, z) in self.no_fly_zones.iter().enumerate() {
            if !(z.radius >= 0.0) || !z.center.is_finite() {
                return Err(invariant(
                    format!("{path}.no_fly_zones[{i}]"),
                    "zone radius must be >= 0",
                ));
            }
        }
        if let Some(s) = self.launch_standoff {
            if !(s >= 0.0) {
                return Err(invariant(
                    format!("{path}.launch_standoff"),
                    "launch_standoff must be >= 0",
                ));
            }
        }
        if let Some(d) = self.max_plan_duration {
            if !(d >= 0.0) {
                return Err(invariant(
                    format!("{path}.max_plan_duration"),
                    "max_plan_duration must be >= 0",
                ));
            }
        }
        Ok(())
    }

    /// Effective launch budget of an entity.
    pub fn ammo_budget_for(&self, entity: &EntityState) -> u32 {
        match self.ammo_budget.get(&entity.id) {
            Some(b) => (*b).min(entity.ammo),
            None => entity.ammo,
        }
    }

    /// Effective speed cap of an entity.
    pub fn speed_limit_for(&self, entity: &EntityState) -> f64 {
        match self.speed_limits.get(&entity.class) {
            Some(v) => v.min(entity.speed_max),
            None => entity.speed_max,
        }
    }

    pub fn max_duration(&self, sim: &SimConfig) -> f64 {
        self.max_plan_duration.unwrap_or(sim.horizon)
    }
}

fn default_width() -> f64 {
    260.0
}
fn default_height() -> f64 {
    160.0
}

/// Static battlefield definition. Construct through [`Scenario::validated`]
/// or [`load_scenario`] so invariants are checked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    #[serde(default = "default_width")]
    pub map_width: f64,
    #[serde(default = "default_height")]
    pub map_height: f64,
    pub entities: Vec<EntityState>,
    pub core_target_id: String,
    #[serde(default)]
    pub constraint_set: ConstraintSet,
    #[serde(default)]
    pub difficulty: Difficulty,
    #[serde(default)]
    pub sim_config: SimConfig,
}

impl Scenario {
    pub fn validated(self) -> Result<Self, ScenarioError> {
        self.check()?;
        Ok(self)
    }

    pub fn check(&self) -> Result<(), ScenarioError> {
        if !(self.map_width > 0.0 && self.map_height > 0.0) {
            return Err(invariant(
                "$.map_width".into(),
                "map dimensions must be > 0",
            ));
        }
        self.sim_config.check("$.sim_config")?;
        self.constraint_set.check("$.constraint_set")?;
        let mut ids = BTreeSet::new();
        for (i, e) in self.entities.iter().enumerate() {
            let path = format!("$.entities[{i}]");
            e.check(&path, self.map_width, self.map_height)?;
            if !ids.insert(e.id.as_str()) {
                return Err(invariant(format!("{path}.id"), "duplicate entity id"));
            }
        }
        let centers: Vec<&EntityState> = self
            .entities
            .iter()
            .filter(|e| e.class == EntityClass::CommandCenter && e.side == Side::Opponent)
            .collect();
        if centers.len() != 1 {
            return Err(invariant(
                "$.entities".into(),
                "exactly one CommandCenter on the opponent side is required",
            ));
        }
        if centers[0].id != self.core_target_id {
            return Err(invariant(
                "$.core_target_id".into(),
                "core_target_id must name the CommandCenter",
            ));
        }
        Ok(())
    }

    pub fn entity(&self, id: &str) -> Option<&EntityState> {
        self.entities.iter().find(|e| e.id == id)
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.entities.iter().position(|e| e.id == id)
    }

    pub fn core_target(&self) -> &EntityState {
        self.entity(&self.core_target_id)
            .expect("validated scenario has its core target")
    }

    pub fn side(&self, side: Side) -> impl Iterator<Item = &EntityState> {
        self.entities.iter().filter(move |e| e.side == side)
    }

    /// SHA-256 of the canonical serialization.
    pub fn digest(&self) -> String {
        canonical::digest(self).expect("validated scenario serializes")
    }

    pub fn to_canonical_json(&self) -> String {
        canonical::to_string(self).expect("validated scenario serializes")
    }

    pub fn from_json_str(text: &str) -> Result<Self, ScenarioError> {
        let scenario: Scenario = parse_json(text)?;
        scenario.validated()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("invariant violated at {path}: {message}")]
    Invariant { path: String, message: String },
}

impl ScenarioError {
    pub fn path(&self) -> &str {
        match self {
            ScenarioError::Io { path, .. }
            | ScenarioError::Parse { path, .. }
            | ScenarioError::Schema { path, .. }
            | ScenarioError::Invariant { path, .. } => path,
        }
    }
}

fn invariant(path: String, message: &str) -> ScenarioError {
    ScenarioError::Invariant {
        path,
        message: message.to_string(),
    }
}

/// Deserialize any document type, mapping syntax problems to `Parse` and
/// shape problems (missing or unknown fields, wrong types) to `Schema`,
/// each with the JSON path of the offending element.
pub fn parse_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, ScenarioError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    match serde_path_to_error::deserialize::<_, T>(de) {
        Ok(v) => Ok(v),
        Err(err) => {
            let path = format!("$.{}", err.path())
                .replace("$..", "$.")
                .trim_end_matches('.')
                .to_string();
            let inner = err.into_inner();
            let message = inner.to_string();
            match inner.classify() {
                serde_json::error::Category::Data => Err(ScenarioError::Schema { path, message }),
                _ => Err(ScenarioError::Parse { path, message }),
            }
        }
    }
}

pub fn read_text(path: &Path) -> Result<String, ScenarioError> {
    std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Load and validate a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    Scenario::from_json_str(&read_text(path)?)
}
