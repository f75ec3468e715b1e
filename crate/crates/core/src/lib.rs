//! Core of the tactical simulator: geometry, scenario and plan schemas, the
//! deterministic engine and opponent policies.

pub mod canonical;
pub mod geom;
pub mod opponents;
pub mod plan;
pub mod scenario;
pub mod sim;
pub mod templates;

pub use geom::Vec2;
pub use plan::{ActionKind, AtomicAction, CandidatePlan, Intent};
pub use scenario::{
    EntityClass, EntityState, Scenario, ScenarioError, Side, SimConfig, ValueClass, WeaponSpec,
};
