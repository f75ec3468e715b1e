//! Discrete-time engagement simulation.

pub mod engine;
pub mod event;
pub mod export;
pub mod fire;
pub mod rng;
pub mod rollout;

pub use engine::{
    check_termination, step, FailureReason, GlobalState, StaleAction, StaleReason, StepResult,
    Termination, ARRIVAL_EPS,
};
pub use event::{Event, EventKind, EventPayload};
pub use fire::{
    effective_hit_probability, resolve_fire, suppressed_fire_params, DomainError, FireMode,
};
pub use rng::{RngStream, SeedInfo};
pub use rollout::{
    delivery_buckets, run_rollout, EntityTrack, Outcome, RolloutError, RolloutRecord, SideCounts,
};
