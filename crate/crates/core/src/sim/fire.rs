//! Engagement model: distance-decayed hit probability, suppression penalties
//! and single-shot resolution.

use super::event::{Event, EventKind, EventPayload};
use super::rng::RngStream;
use crate::scenario::{EntityState, SimConfig};

/// Slack for comparing accumulated tick times against firing intervals.
pub const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DomainError {
    #[error("p_base must lie in [0, 1], got {0}")]
    ProbabilityOutOfRange(f64),
    #[error("range must be > 0, got {0}")]
    NonPositiveRange(f64),
    #[error("distance must be >= 0, got {0}")]
    NegativeDistance(f64),
    #[error("alpha+beta must equal 1, got {0}")]
    CoefficientSum(f64),
    #[error("gamma_rof must be > 1, got {0}")]
    GammaTooSmall(f64),
    #[error("lambda_hit must lie in (0, 1), got {0}")]
    LambdaOutOfRange(f64),
    #[error("rof_base must be > 0, got {0}")]
    NonPositiveRof(f64),
}

/// `p_base * (alpha + beta * (1 - d / range))` inside range, zero beyond it,
/// clamped to `[0, 1]`.
pub fn effective_hit_probability(
    p_base: f64,
    d: f64,
    range: f64,
    alpha: f64,
    beta: f64,
) -> Result<f64, DomainError> {
    if !(0.0..=1.0).contains(&p_base) {
        return Err(DomainError::ProbabilityOutOfRange(p_base));
    }
    if !(range > 0.0) {
        return Err(DomainError::NonPositiveRange(range));
    }
    if !(d >= 0.0) {
        return Err(DomainError::NegativeDistance(d));
    }
    if !((alpha + beta - 1.0).abs() <= 1e-12) {
        return Err(DomainError::CoefficientSum(alpha + beta));
    }
    if d > range {
        return Ok(0.0);
    }
    Ok((p_base * (alpha + beta * (1.0 - d / range))).clamp(0.0, 1.0))
}

/// Firing interval and hit probability of a suppressed shooter:
/// `(rof_base * gamma_rof, p_eff * lambda_hit)`.
pub fn suppressed_fire_params(
    rof_base: f64,
    p_eff: f64,
    gamma_rof: f64,
    lambda_hit: f64,
) -> Result<(f64, f64), DomainError> {
    if !(gamma_rof > 1.0) {
        return Err(DomainError::GammaTooSmall(gamma_rof));
    }
    if !(lambda_hit > 0.0 && lambda_hit < 1.0) {
        return Err(DomainError::LambdaOutOfRange(lambda_hit));
    }
    if !(rof_base > 0.0) {
        return Err(DomainError::NonPositiveRof(rof_base));
    }
    if !(0.0..=1.0).contains(&p_eff) {
        return Err(DomainError::ProbabilityOutOfRange(p_eff));
    }
    Ok((rof_base * gamma_rof, p_eff * lambda_hit))
}

/// Current firing interval of an armed entity.
pub fn firing_interval(shooter: &EntityState, now: f64, config: &SimConfig) -> Option<f64> {
    let w = shooter.weapon.as_ref()?;
    Some(if shooter.is_suppressed(now) {
        w.rof_base * config.gamma_rof
    } else {
        w.rof_base
    })
}

/// Whether `shooter` may fire at time `now`: alive, armed, loaded, and its
/// firing interval has elapsed since the last shot.
pub fn can_fire(shooter: &EntityState, now: f64, config: &SimConfig) -> bool {
    if !shooter.is_alive() || shooter.ammo == 0 {
        return false;
    }
    let Some(interval) = firing_interval(shooter, now, config) else {
        return false;
    };
    match shooter.last_fire_time {
        None => true,
        Some(last) => now - last >= interval - TIME_EPS,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FireMode {
    /// Hits apply weapon damage.
    Strike,
    /// Hits suppress the target (plus damage if the scenario enables it).
    Suppress,
}

/// State changes produced by one shot.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FireDelta {
    pub ammo_used: u32,
    pub fired_at: Option<f64>,
    pub damage: f64,
    pub suppressed_until: Option<f64>,
}

impl FireDelta {
    pub fn apply(&self, shooter: &mut EntityState, target: &mut EntityState) {
        shooter.ammo -= self.ammo_used;
        if self.fired_at.is_some() {
            shooter.last_fire_time = self.fired_at;
        }
        if self.damage > 0.0 {
            target.health = (target.health - self.damage).max(0.0);
        }
        if self.suppressed_until.is_some() {
            target.suppressed_until = self.suppressed_until;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FireResult {
    pub events: Vec<Event>,
    pub delta: FireDelta,
}

/// Resolve one shot. Infeasible shots (dead parties, no weapon or ammo,
/// interval not elapsed, target out of range) return an empty result and
/// consume no random draw; every feasible shot consumes exactly one.
pub fn resolve_fire(
    shooter: &EntityState,
    target: &EntityState,
    tick: u64,
    now: f64,
    mode: FireMode,
    config: &SimConfig,
    rng: &mut RngStream,
) -> FireResult {
    let mut out = FireResult::default();
    if !target.is_alive() || !can_fire(shooter, now, config) {
        return out;
    }
    let w = shooter.weapon.as_ref().expect("can_fire implies a weapon");
    let d = shooter.position.dist(target.position);
    if d > w.range {
        return out;
    }
    let p_eff = effective_hit_probability(w.p_base, d, w.range, config.alpha, config.beta)
        .expect("validated scenario weapon and coefficients");
    let suppressed = shooter.is_suppressed(now);
    let p = if suppressed {
        p_eff * config.lambda_hit
    } else {
        p_eff
    };

    out.delta.ammo_used = 1;
    out.delta.fired_at = Some(now);
    out.events.push(
        Event::new(tick, EventKind::Fire, &shooter.id, Some(&target.id)).with_payload(
            EventPayload {
                distance: Some(d),
                p_eff: Some(p_eff),
                p: Some(p),
                suppressed: Some(suppressed),
                soft_kill: Some(mode == FireMode::Suppress),
                ..Default::default()
            },
        ),
    );

    let roll = rng.uniform();
    if roll < p {
        let apply_damage = mode == FireMode::Strike || config.suppress_damage;
        let damage = if apply_damage { w.damage } else { 0.0 };
        out.events.push(
            Event::new(tick, EventKind::Hit, &shooter.id, Some(&target.id)).with_payload(
                EventPayload {
                    p: Some(p),
                    roll: Some(roll),
                    damage: Some(damage),
                    ..Default::default()
                },
            ),
        );
        if mode == FireMode::Suppress {
            let until = now + config.tau_sup;
            out.delta.suppressed_until = Some(until);
            out.events.push(
                Event::new(
                    tick,
                    EventKind::SuppressStart,
                    &target.id,
                    Some(&shooter.id),
                )
                .with_payload(EventPayload {
                    until: Some(until),
                    ..Default::default()
                }),
            );
        }
        if apply_damage {
            out.delta.damage = damage;
            if target.health - damage <= 0.0 {
                out.events.push(Event::new(
                    tick,
                    EventKind::Destroyed,
                    &target.id,
                    Some(&shooter.id),
                ));
            }
        }
    } else {
        out.events.push(
            Event::new(tick, EventKind::Miss, &shooter.id, Some(&target.id)).with_payload(
                EventPayload {
                    p: Some(p),
                    roll: Some(roll),
                    ..Default::default()
                },
            ),
        );
    }
    out
}
