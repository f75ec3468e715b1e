//! Opponent policies: a scripted baseline, a predictive value-aware policy
//! and an adapter for externally served models.

mod external;
mod nobrain;
mod predictive;

pub use external::{AdapterEndpoint, DecideRequest, DecideResponse, ExternalPolicy};
pub use nobrain::NoBrain;
pub use predictive::{
    predict_trajectories, prioritize_targets, Prediction, PredictionSet, Predictive, TargetPriority,
};

use crate::plan::{ActionKind, AtomicAction};
use crate::scenario::{Scenario, Side};
use crate::sim::fire::can_fire;
use crate::sim::{GlobalState, SeedInfo};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error, Serialize, Deserialize)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum OpponentFault {
    #[error("adapter timed out after {0} ms")]
    Timeout(u64),
    #[error("adapter protocol error: {0}")]
    ProtocolError(String),
    #[error("adapter schema error: {0}")]
    SchemaError(String),
}

/// Decision-maker for the opponent side.
///
/// `decide` sees every state from the initial one up to the current tick and
/// returns the actions to execute in the next step. Implementations must only
/// command live opponent entities and must respect ammo and firing-interval
/// limits at the next tick's time.
pub trait OpponentPolicy: Send {
    fn name(&self) -> &str;
    fn reset(&mut self, seed: SeedInfo);
    fn decide(
        &mut self,
        history: &[GlobalState],
        scenario: &Scenario,
    ) -> Result<Vec<AtomicAction>, OpponentFault>;
    /// Non-fatal problems recorded since the last call (e.g. dropped actions).
    fn drain_faults(&mut self) -> Vec<String> {
        Vec::new()
    }
}

fn default_h_pred() -> usize {
    20
}
fn default_w_b() -> f64 {
    2.0
}
fn default_w_f() -> f64 {
    1.0
}
fn default_timeout_ms() -> u64 {
    2000
}
fn default_history_tail() -> usize {
    20
}

/// Serializable policy selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case", deny_unknown_fields)]
pub enum OpponentConfig {
    NoBrain,
    Predictive {
        /// Prediction horizon in ticks.
        #[serde(default = "default_h_pred")]
        h_pred: usize,
        /// Target value of high-value entities.
        #[serde(default = "default_w_b")]
        w_b: f64,
        /// Target value of ordinary entities.
        #[serde(default = "default_w_f")]
        w_f: f64,
    },
    External {
        endpoint: AdapterEndpoint,
        #[serde(default = "default_timeout_ms")]
        timeout_ms: u64,
        #[serde(default = "default_history_tail")]
        history_tail: usize,
    },
}

impl OpponentConfig {
    pub fn predictive() -> Self {
        OpponentConfig::Predictive {
            h_pred: default_h_pred(),
            w_b: default_w_b(),
            w_f: default_w_f(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            OpponentConfig::NoBrain => "nobrain",
            OpponentConfig::Predictive { .. } => "predictive",
            OpponentConfig::External { .. } => "external",
        }
    }

    /// A fresh policy instance; one per rollout.
    pub fn build(&self) -> Box<dyn OpponentPolicy> {
        match self {
            OpponentConfig::NoBrain => Box::new(NoBrain),
            OpponentConfig::Predictive { h_pred, w_b, w_f } => {
                Box::new(Predictive::new(*h_pred, *w_b, *w_f))
            }
            OpponentConfig::External {
                endpoint,
                timeout_ms,
                history_tail,
            } => Box::new(ExternalPolicy::new(
                endpoint.clone(),
                *timeout_ms,
                *history_tail,
            )),
        }
    }
}

/// Time at which actions decided now will be executed.
pub(crate) fn execution_time(state: &GlobalState, scenario: &Scenario) -> f64 {
    (state.tick + 1) as f64 * scenario.sim_config.dt
}

/// Weapon-carrying opponents able to fire at the next tick, in stored order.
pub(crate) fn ready_shooters<'a>(
    state: &'a GlobalState,
    scenario: &'a Scenario,
) -> impl Iterator<Item = (usize, &'a crate::scenario::EntityState)> + 'a {
    let t = execution_time(state, scenario);
    state
        .alive(Side::Opponent)
        .filter(move |(_, e)| can_fire(e, t, &scenario.sim_config))
}

pub(crate) fn launch(
    shooter: &crate::scenario::EntityState,
    t: f64,
    target_id: &str,
) -> AtomicAction {
    let weapon = shooter.weapon.as_ref().expect("ready shooters are armed");
    AtomicAction::launch(&shooter.id, t, &weapon.name, target_id)
}

/// Why an externally supplied action cannot be executed, if it cannot.
pub(crate) fn reject_reason(action: &AtomicAction, state: &GlobalState) -> Option<String> {
    let Some(actor) = state.entity(&action.actor_id) else {
        return Some(format!("unknown actor {}", action.actor_id));
    };
    if actor.side != Side::Opponent {
        return Some(format!("{} is not an opponent entity", action.actor_id));
    }
    if !actor.is_alive() {
        return Some(format!("{} is dead", action.actor_id));
    }
    if let Some(target) = action.target_id() {
        match state.entity(target) {
            None => return Some(format!("unknown target {target}")),
            Some(t) if !t.is_alive() => return Some(format!("target {target} is dead")),
            _ => {}
        }
    }
    if let ActionKind::Launch { weapon, .. } = &action.kind {
        if actor.weapon.as_ref().map(|w| &w.name) != Some(weapon) {
            return Some(format!("{} has no weapon {weapon}", action.actor_id));
        }
    }
    None
}
