//! One-shot plan request to an external generator over HTTP.

use crate::kinematics::planned_trajectories;
use crate::PlanError;
use serde::Serialize;
use std::time::Duration;
use tacsim_core::{CandidatePlan, Intent, Scenario};

#[derive(Serialize)]
struct PlanRequest<'a> {
    intent: &'a Intent,
    scenario: &'a Scenario,
}

/// POST `{intent, scenario}` to `{base_url}/plan` and parse the reply as a
/// candidate plan. The reply may be the plan itself or `{"plan": ...}`;
/// `trajectories` may be omitted and are always recomputed.
pub fn request_plan(
    base_url: &str,
    intent: &Intent,
    scenario: &Scenario,
    timeout_ms: u64,
) -> Result<CandidatePlan, PlanError> {
    let config = ureq::Agent::config_builder()
        .timeout_global(Some(Duration::from_millis(timeout_ms)))
        .http_status_as_error(false)
        .build();
    let agent = ureq::Agent::new_with_config(config);
    let body = serde_json::to_string(&PlanRequest { intent, scenario })
        .map_err(|e| PlanError::Adapter(e.to_string()))?;
    let target = format!("{}/plan", base_url.trim_end_matches('/'));
    let mut response = agent
        .post(&target)
        .header("content-type", "application/json")
        .send(&body)
        .map_err(|e| PlanError::Adapter(format!("{target}: {e}")))?;
    if response.status() != 200 {
        return Err(PlanError::Adapter(format!(
            "{target}: HTTP status {}",
            response.status().as_u16()
        )));
    }
    let text = response
        .body_mut()
        .read_to_string()
        .map_err(|e| PlanError::Adapter(e.to_string()))?;
    let mut value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| PlanError::Adapter(format!("reply is not JSON: {e}")))?;
    if let Some(inner) = value.get_mut("plan") {
        value = inner.take();
    }
    if let Some(obj) = value.as_object_mut() {
        obj.entry("trajectories")
            .or_insert_with(|| serde_json::json!({}));
    }
    let mut plan: CandidatePlan = serde_json::from_value(value)
        .map_err(|e| PlanError::Adapter(format!("reply is not a plan: {e}")))?;
    plan.planned_trajectories = planned_trajectories(&plan.actions, scenario);
    Ok(plan)
}
