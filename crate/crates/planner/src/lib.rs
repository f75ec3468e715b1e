//! Hierarchical plan generation: threat-aware route search, fast Monte-Carlo
//! assessment, composition of a coordinated plan, and rule-based validation
//! with local repair.

pub mod analyst;
pub mod compose;
pub mod external;
pub mod generate;
pub mod kinematics;
pub mod pathfinder;
pub mod repair;
pub mod threat;
pub mod validator;

pub use analyst::{analyst_assess, draft_plan, AssessmentVector};
pub use compose::{planner_compose, v_global};
pub use generate::{generate_candidates, naive_plan, Ablation};
pub use kinematics::planned_trajectories;
pub use pathfinder::{pathfinder_topk, RouteSet, RouteSkeleton};
pub use repair::{repair_loop, repair_plan};
pub use threat::ThreatField;
pub use validator::{validator_check, Violation, ViolationCode};

use serde::{Deserialize, Serialize};
use tacsim_core::Vec2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlanError {
    #[error("unknown core target {0}")]
    UnknownTarget(String),
    #[error("no lattice path between start and target")]
    Unreachable,
    #[error("every route scores below the utility floor")]
    NoFeasibleRoute,
    #[error("cannot repair {code:?} for {actor_id}: {reason}")]
    IrreparableViolation {
        code: ViolationCode,
        actor_id: String,
        reason: String,
    },
    #[error("plan still has {} violation(s) after the repair budget", violations.len())]
    StillInvalid { violations: Vec<Violation> },
    #[error("no valid candidate: {}", reasons.join("; "))]
    NoValidCandidate { reasons: Vec<String> },
    #[error("assessment rollout failed: {0}")]
    Rollout(String),
    #[error("plan adapter: {0}")]
    Adapter(String),
}

fn default_cell() -> f64 {
    4.0
}
fn default_w_len() -> f64 {
    1.0
}
fn default_w_threat() -> f64 {
    50.0
}
fn default_rho() -> f64 {
    2.0
}
fn default_clearance() -> f64 {
    3.0
}
fn default_n_fast() -> usize {
    10
}
fn default_r_max() -> usize {
    3
}
fn default_escort_offset() -> Vec2 {
    Vec2::new(-6.0, 6.0)
}
fn default_suppress_standoff() -> f64 {
    0.6
}
fn default_hold_fraction() -> f64 {
    0.8
}
fn default_v_floor() -> f64 {
    -1e9
}
fn default_timeout_ms() -> u64 {
    10_000
}

/// Tunables of the generation pipeline. All fields have defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlannerConfig {
    /// Lattice spacing in map units.
    #[serde(default = "default_cell")]
    pub cell_size: f64,
    #[serde(default = "default_w_len")]
    pub w_len: f64,
    #[serde(default = "default_w_threat")]
    pub w_threat: f64,
    /// Cost multiplier applied to edges of already extracted routes.
    #[serde(default = "default_rho")]
    pub rho: f64,
    /// Extra margin around no-fly zones during route search.
    #[serde(default = "default_clearance")]
    pub clearance: f64,
    /// Assessment rollouts per route.
    #[serde(default = "default_n_fast")]
    pub n_fast: usize,
    /// Maximum validate/repair rounds per candidate.
    #[serde(default = "default_r_max")]
    pub r_max: usize,
    /// Suppression starts this long before the bombers enter a threat's
    /// range; defaults to the suppression duration of the scenario.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_lead: Option<f64>,
    /// Escort station relative to the escorted bomber; the y component
    /// alternates sign between escorts.
    #[serde(default = "default_escort_offset")]
    pub escort_offset: Vec2,
    /// Suppressing fighters hold this fraction of their weapon range from the target.
    #[serde(default = "default_suppress_standoff")]
    pub suppress_standoff: f64,
    /// Bombers hold (and start launching) at this fraction of their launch limit.
    #[serde(default = "default_hold_fraction")]
    pub hold_fraction: f64,
    /// Routes whose utility falls below this are rejected.
    #[serde(default = "default_v_floor")]
    pub v_floor: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ablation: Option<Ablation>,
    /// Base URL of an external plan generator used by the `single` ablation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan_endpoint: Option<String>,
    #[serde(default = "default_timeout_ms")]
    pub plan_timeout_ms: u64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all PlannerConfig fields have defaults")
    }
}
