use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    Fire,
    Hit,
    Miss,
    SuppressStart,
    SuppressEnd,
    Destroyed,
    MoveCompleted,
}

/// Kind-specific numbers. Absent fields are omitted from the log.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventPayload {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance: Option<f64>,
    /// Distance-decayed hit probability before any suppression penalty.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_eff: Option<f64>,
    /// Probability actually used for the roll.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roll: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub damage: Option<f64>,
    /// Shooter was suppressed when firing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suppressed: Option<bool>,
    /// Shot was a suppression (soft-kill) shot.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub soft_kill: Option<bool>,
    /// End of the suppression window.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub until: Option<f64>,
}

/// One entry of the event log.
///
/// For `Fire`, `Hit` and `Miss` the actor is the shooter and the target the
/// entity fired at. For `SuppressStart`, `SuppressEnd`, `Destroyed` and
/// `MoveCompleted` the actor is the entity whose state changed; the target of
/// a `SuppressStart` or `Destroyed` is the entity that caused it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Event {
    pub tick: u64,
    pub kind: EventKind,
    pub actor_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_id: Option<String>,
    #[serde(default)]
    pub payload: EventPayload,
}

impl Event {
    pub fn new(tick: u64, kind: EventKind, actor_id: &str, target_id: Option<&str>) -> Self {
        Event {
            tick,
            kind,
            actor_id: actor_id.to_string(),
            target_id: target_id.map(str::to_string),
            payload: EventPayload::default(),
        }
    }

    pub fn with_payload(mut self, payload: EventPayload) -> Self {
        self.payload = payload;
        self
    }
}
