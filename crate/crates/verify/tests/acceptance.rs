//! Acceptance suite. Runs every criterion in order, prints one PASS/FAIL
//! line each and exits non-zero if any fails. Pass criterion numbers as
//! arguments to run a subset, e.g. `cargo test --test acceptance -- 3 7`.

use rayon::prelude::*;
use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};
use tacsim_core::geom::{point_segment_distance, Circle};
use tacsim_core::opponents::OpponentConfig;
use tacsim_core::scenario::{ConstraintSet, SimConfig, ValueClass};
use tacsim_core::sim::{
    effective_hit_probability, resolve_fire, run_rollout, EntityTrack, Event, EventKind, EventPayload, FireMode, Outcome,
    RngStream, RolloutRecord, SeedInfo, SideCounts,
};
use tacsim_core::{templates, AtomicAction, CandidatePlan, EntityClass, EntityState, Intent, Scenario, Side, Vec2, WeaponSpec};
use tacsim_planner::{
    generate_candidates, pathfinder_topk, planned_trajectories, repair_loop, validator_check, Ablation, PlanError, PlannerConfig,
    ViolationCode,
};
use tacsim_verify::dataset::{eva_token_weights, weighted_nll, EvaConfig, PredictionSample, TokenAnnotation};
use tacsim_verify::metrics::{
    compute_ade, compute_cla, compute_msr, compute_pqs, process_metrics, success_aggregates, suppression_rate_outcome, MetricWeights,
};
use tacsim_verify::report::{rank_and_report, ReportConfig};
use tacsim_verify::rubric::RubricWeights;
use tacsim_verify::monte_carlo_verify;

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant, what: &str) -> Result<Duration, String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("{what} took {took:.2?}, limit {limit:?}"))?;
    Ok(took)
}

fn weapon(name: &str, p_base: f64, range: f64, rof: f64, damage: f64, ammo: u32) -> WeaponSpec {
    WeaponSpec { name: name.into(), p_base, range, rof_base: rof, damage, ammo_capacity: ammo }
}

fn entity(id: &str, side: Side, class: EntityClass, x: f64, y: f64, health: f64) -> EntityState {
    EntityState::new(id, side, class, Vec2::new(x, y), health)
}

fn bomber(id: &str, x: f64, y: f64, speed: f64, range: f64, ammo: u32) -> EntityState {
    entity(id, Side::PlanExecuting, EntityClass::Bomber, x, y, 100.0).with_speed(speed).with_weapon(weapon("agm", 1.0, range, 1.0, 100.0, ammo))
}

fn command_center(x: f64, y: f64) -> EntityState {
    entity("CC", Side::Opponent, EntityClass::CommandCenter, x, y, 100.0)
}

fn scenario(entities: Vec<EntityState>, constraint_set: ConstraintSet) -> Scenario {
    Scenario {
        name: "fixture".into(),
        map_width: 260.0,
        map_height: 160.0,
        entities,
        core_target_id: "CC".into(),
        constraint_set,
        difficulty: Default::default(),
        sim_config: SimConfig::default(),
    }
    .validated()
    .expect("fixture scenario is valid")
}

fn plan_of(id: &str, actions: Vec<AtomicAction>, s: &Scenario) -> CandidatePlan {
    let planned_trajectories = planned_trajectories(&actions, s);
    CandidatePlan { plan_id: id.into(), actions, planned_trajectories, metadata: BTreeMap::new() }
}

// ---------------------------------------------------------------------------

fn hit_probability_grid() -> Result<String, String> {
    let start = Instant::now();
    let p_base = 0.8;
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for i in 0..10 {
        let d = 100.0 * i as f64 / 9.0;
        for j in 0..10 {
            let range = 10.0 + 90.0 * j as f64 / 9.0;
            for k in 0..10 {
                let alpha = k as f64 / 9.0;
                let got = effective_hit_probability(p_base, d, range, alpha, 1.0 - alpha).map_err(|e| e.to_string())?;
                let expected = if d > range { 0.0 } else { p_base * (1.0 - (1.0 - alpha) * d / range) };
                worst = worst.max((got - expected).abs());
                n += 1;
            }
        }
    }
    ensure(worst <= 1e-12, || format!("max deviation {worst:e} over {n} points"))?;
    for &(alpha, beta) in &[(0.3, 0.7), (0.5, 0.5), (0.0, 1.0), (1.0, 0.0)] {
        let at_zero = effective_hit_probability(p_base, 0.0, 40.0, alpha, beta).unwrap();
        let at_range = effective_hit_probability(p_base, 40.0, 40.0, alpha, beta).unwrap();
        let beyond = effective_hit_probability(p_base, 40.0 + 1e-9, 40.0, alpha, beta).unwrap();
        ensure(at_zero == p_base, || format!("d=0 gives {at_zero} for alpha {alpha}"))?;
        ensure(at_range == p_base * alpha, || format!("d=R gives {at_range} for alpha {alpha}"))?;
        ensure(beyond == 0.0, || format!("d>R gives {beyond}"))?;
    }
    let took = within(Duration::from_secs(1), start, "grid")?;
    Ok(format!("{n} grid points, max deviation {worst:.1e}, boundaries exact, {took:.2?}"))
}

fn hit_rate_calibration() -> Result<String, String> {
    let start = Instant::now();
    let cfg = SimConfig::default();
    let shooter = entity("S", Side::Opponent, EntityClass::AntiAirThreat, 50.0, 50.0, 100.0).with_weapon(weapon("w", 0.24, 30.0, 1.0, 1.0, 1));
    let target = entity("T", Side::PlanExecuting, EntityClass::Bomber, 50.0, 50.0, 100.0);
    let mut rng = RngStream::new(2024, 0);
    let draws = 200_000;
    let mut hits = 0u64;
    for _ in 0..draws {
        let r = resolve_fire(&shooter, &target, 0, 0.0, FireMode::Strike, &cfg, &mut rng);
        let fire = &r.events[0];
        if fire.payload.p != Some(0.24) {
            return Err(format!("shot used p = {:?}", fire.payload.p));
        }
        hits += r.events.iter().any(|e| e.kind == EventKind::Hit) as u64;
    }
    let rate = hits as f64 / draws as f64;
    ensure((rate - 0.24).abs() <= 0.0029, || format!("hit rate {rate:.5} outside 0.24 +- 0.0029"))?;
    let took = within(Duration::from_secs(5), start, "calibration")?;
    Ok(format!("{hits}/{draws} hits = {rate:.5}, {took:.2?}"))
}

fn suppression_mechanics() -> Result<String, String> {
    let s = scenario(
        vec![
            command_center(200.0, 80.0),
            entity("AAT", Side::Opponent, EntityClass::AntiAirThreat, 100.0, 80.0, 100.0).with_weapon(weapon("sam", 0.5, 40.0, 1.0, 1.0, 100)),
            entity("F", Side::PlanExecuting, EntityClass::Fighter, 85.0, 80.0, 1e6).with_weapon(weapon("gun", 1.0, 30.0, 0.5, 1.0, 100)),
        ],
        ConstraintSet::default(),
    );
    let cfg = &s.sim_config;
    ensure((cfg.gamma_rof, cfg.lambda_hit, cfg.tau_sup) == (2.0, 0.5, 3.0), || format!("unexpected defaults {cfg:?}"))?;
    let plan = plan_of("suppress", vec![AtomicAction::suppress("F", 2.0, "AAT", 12.0)], &s);
    let mut policy = OpponentConfig::NoBrain.build();
    let r = run_rollout(&s, &plan, policy.as_mut(), SeedInfo::from_seed(3)).map_err(|e| e.to_string())?;
    let (mut suppressed, mut last_fire, mut gaps, mut halved, mut plain) = (false, None::<u64>, 0, 0, 0);
    let mut min_gap = u64::MAX;
    for e in r.events.iter().filter(|e| e.actor_id == "AAT") {
        match e.kind {
            EventKind::SuppressStart => suppressed = true,
            EventKind::SuppressEnd => suppressed = false,
            EventKind::Fire => {
                let (p, p_eff) = (e.payload.p.unwrap(), e.payload.p_eff.unwrap());
                if suppressed {
                    ensure(p == p_eff * 0.5, || format!("tick {}: p {p} is not half of {p_eff}", e.tick))?;
                    halved += 1;
                    if let Some(prev) = last_fire {
                        let gap = e.tick - prev;
                        ensure(gap >= 20, || format!("tick {}: gap of {gap} ticks while suppressed", e.tick))?;
                        min_gap = min_gap.min(gap);
                        gaps += 1;
                    }
                } else {
                    ensure(p == p_eff, || format!("tick {}: unsuppressed p {p} differs from {p_eff}", e.tick))?;
                    plain += 1;
                }
                last_fire = Some(e.tick);
            }
            _ => {}
        }
    }
    ensure(gaps >= 3 && plain >= 1, || format!("too little evidence: {gaps} suppressed gaps, {plain} unsuppressed shots"))?;
    Ok(format!("{halved} suppressed shots at half p, {gaps} gaps >= {:.1} s, {plain} unsuppressed shots", min_gap as f64 * 0.1))
}

fn determinism_and_workers() -> Result<String, String> {
    let s = templates::easy();
    let intent = Intent::destroy("CC");
    let plan = generate_candidates(&intent, &s, 1, &PlannerConfig::default()).map_err(|e| e.to_string())?.remove(0);
    let config = |workers| ReportConfig {
        opponent: OpponentConfig::predictive(),
        seeds: (1..=100).collect(),
        weights: MetricWeights::default(),
        rubric_weights: RubricWeights::default(),
        workers,
    };
    let start = Instant::now();
    let one = rank_and_report(std::slice::from_ref(&plan), std::slice::from_ref(&s), &config(1)).map_err(|e| e.to_string())?;
    let took = within(Duration::from_secs(10), start, "100 single-worker rollouts")?;
    let eight = rank_and_report(std::slice::from_ref(&plan), std::slice::from_ref(&s), &config(8)).map_err(|e| e.to_string())?;
    let (h1, h8) = (&one.plans[0].log_hashes, &eight.plans[0].log_hashes);
    ensure(h1.len() == 100, || format!("{} rollouts recorded", h1.len()))?;
    ensure(h1 == h8, || "per-seed log hashes differ between 1 and 8 workers".into())?;
    ensure(one.to_json() == eight.to_json(), || "report bytes differ between 1 and 8 workers".into())?;
    ensure(one.render_text() == eight.render_text(), || "text reports differ".into())?;
    let rerun = monte_carlo_verify(&plan, &s, &OpponentConfig::predictive(), &[42], 1).map_err(|e| e.to_string())?;
    ensure(h1.get("easy/42") == Some(&rerun.records[0].log_hash), || "seed 42 does not replay to the same hash".into())?;
    Ok(format!("100 seeds, 200-tick horizon: identical hashes and report bytes, 1 worker in {took:.2?}"))
}

// ---------------------------------------------------------------------------

const BLUE: [&str; 3] = ["B-1", "B-2", "F-1"];
const RED: [&str; 3] = ["CC", "AAT-1", "AP-1"];

fn class_of(id: &str) -> EntityClass {
    match id {
        "B-1" | "B-2" => EntityClass::Bomber,
        "F-1" => EntityClass::Fighter,
        "CC" => EntityClass::CommandCenter,
        "AAT-1" => EntityClass::AntiAirThreat,
        _ => EntityClass::AirPatrol,
    }
}

fn walk(rng: &mut RngStream, len: usize, from: Vec2) -> Vec<Vec2> {
    let mut p = from;
    (0..len)
        .map(|_| {
            let out = p;
            p = p + Vec2::new(rng.uniform() * 3.0 - 1.0, rng.uniform() * 2.0 - 1.0);
            out
        })
        .collect()
}

/// A synthetic rollout record with random tracks and a random but
/// well-formed event log (every Fire directly followed by its Hit or Miss),
/// plus a plan whose trajectories differ from the simulated ones.
fn metric_fixture(i: u64) -> (RolloutRecord, CandidatePlan) {
    let mut rng = RngStream::new(0xf1c, i);
    let ticks = 20 + (rng.uniform() * 60.0) as usize;
    let mut tracks = Vec::new();
    let mut planned = BTreeMap::new();
    for (k, id) in BLUE.iter().chain(RED.iter()).enumerate() {
        let side = if k < 3 { Side::PlanExecuting } else { Side::Opponent };
        let class = class_of(id);
        let start = Vec2::new(20.0 + 40.0 * k as f64, 80.0);
        let positions = walk(&mut rng, ticks, start);
        if side == Side::PlanExecuting {
            let plan_len = if rng.uniform() < 0.3 { ticks / 2 } else { ticks + 5 };
            planned.insert(id.to_string(), walk(&mut rng, plan_len, start));
        }
        tracks.push(EntityTrack {
            entity_id: id.to_string(),
            side,
            class,
            value_class: class.default_value_class(),
            positions,
            health: vec![100.0; ticks],
            ammo: vec![10; ticks],
            suppressed: vec![false; ticks],
        });
    }
    let mut events = Vec::new();
    let mut tick = 0u64;
    let shots = (rng.uniform() * 30.0) as usize;
    for _ in 0..shots {
        tick = (tick + (rng.uniform() * 3.0) as u64).min(ticks as u64 - 2);
        let blue_shoots = rng.uniform() < 0.5;
        let (shooter, target) = if blue_shoots {
            (BLUE[(rng.uniform() * 3.0) as usize], RED[(rng.uniform() * 3.0) as usize])
        } else {
            (RED[1 + (rng.uniform() * 2.0) as usize], BLUE[(rng.uniform() * 3.0) as usize])
        };
        let soft = shooter == "F-1" && rng.uniform() < 0.5;
        let payload = EventPayload { soft_kill: soft.then_some(true), ..Default::default() };
        events.push(Event::new(tick, EventKind::Fire, shooter, Some(target)).with_payload(payload));
        let kind = if rng.uniform() < 0.45 { EventKind::Hit } else { EventKind::Miss };
        events.push(Event::new(tick, kind, shooter, Some(target)));
    }
    let mut lost = 0;
    for b in BLUE {
        if rng.uniform() < 0.2 {
            events.push(Event::new(tick, EventKind::Destroyed, b, Some("AAT-1")));
            lost += 1;
        }
    }
    let success = rng.uniform() < 0.55;
    let end_tick = ticks as u64 - 1;
    if success {
        events.push(Event::new(end_tick, EventKind::Destroyed, "CC", Some("B-1")));
    }
    let blue_fire = events.iter().filter(|e| e.kind == EventKind::Fire && BLUE.contains(&e.actor_id.as_str())).count() as u32;
    let record = RolloutRecord {
        seed: SeedInfo::from_seed(i),
        plan_id: "fixture".into(),
        opponent: "nobrain".into(),
        scenario_digest: format!("s{}", i % 2),
        outcome: if success { Outcome::Success } else { Outcome::Failure },
        failure_reason: None,
        end_tick,
        dt: 0.1,
        events,
        tracks,
        initial_counts: SideCounts { plan_executing: 3, opponent: 3 },
        ammo_spent: SideCounts { plan_executing: blue_fire, opponent: 0 },
        entities_lost: SideCounts { plan_executing: lost, opponent: 0 },
        stale_actions: Vec::new(),
        opponent_faults: Vec::new(),
        log_hash: String::new(),
    };
    let plan = CandidatePlan { plan_id: "fixture".into(), actions: Vec::new(), planned_trajectories: planned, metadata: BTreeMap::new() };
    (record, plan)
}

/// Straightforward recomputation of every metric from raw logs and tracks.
struct Oracle {
    msr: f64,
    cla: f64,
    ade: f64,
    fde: f64,
    opp_fire: u64,
    opp_hit: u64,
    blue_fire: u64,
    blue_hit: u64,
    missiles: u64,
    missile_hits: u64,
    missile_misses: u64,
    lost_mean: f64,
    lost_fraction: f64,
    ttk: Option<f64>,
}

fn oracle(records: &[RolloutRecord], plan: &CandidatePlan, w: &MetricWeights) -> Oracle {
    let n = records.len() as f64;
    let mut o = Oracle {
        msr: 0.0,
        cla: 0.0,
        ade: 0.0,
        fde: 0.0,
        opp_fire: 0,
        opp_hit: 0,
        blue_fire: 0,
        blue_hit: 0,
        missiles: 0,
        missile_hits: 0,
        missile_misses: 0,
        lost_mean: 0.0,
        lost_fraction: 0.0,
        ttk: None,
    };
    let (mut disp_sum, mut disp_n, mut final_sum, mut final_n) = (0.0, 0.0, 0.0, 0.0);
    let mut kills = Vec::new();
    for r in records {
        let destroyed_blue = r.events.iter().filter(|e| e.kind == EventKind::Destroyed && BLUE.contains(&e.actor_id.as_str())).count() as f64;
        let blue_shots = r.events.iter().filter(|e| e.kind == EventKind::Fire && BLUE.contains(&e.actor_id.as_str())).count() as f64;
        let core_killed = r.events.iter().find(|e| e.kind == EventKind::Destroyed && e.actor_id == "CC");
        if let Some(kill) = core_killed {
            o.msr += 1.0;
            kills.push(kill.tick as f64 * r.dt);
        }
        o.cla += w.eta1 * destroyed_blue + w.eta2 * blue_shots;
        o.lost_mean += destroyed_blue;
        o.lost_fraction += destroyed_blue / 3.0;
        for i in 0..r.events.len() {
            let e = &r.events[i];
            if e.kind != EventKind::Fire {
                continue;
            }
            let result = &r.events[i + 1];
            let hit = result.kind == EventKind::Hit;
            if BLUE.contains(&e.actor_id.as_str()) {
                o.blue_fire += 1;
                o.blue_hit += hit as u64;
                if e.payload.soft_kill != Some(true) {
                    o.missiles += 1;
                    if hit {
                        o.missile_hits += 1;
                    } else {
                        o.missile_misses += 1;
                    }
                }
            } else {
                o.opp_fire += 1;
                o.opp_hit += hit as u64;
            }
        }
        for id in BLUE {
            let sim = &r.tracks.iter().find(|t| t.entity_id == id).unwrap().positions;
            let plan_pts = &plan.planned_trajectories[id];
            for (k, p) in sim.iter().enumerate() {
                let q = if k < plan_pts.len() { plan_pts[k] } else { *plan_pts.last().unwrap() };
                disp_sum += ((p.x - q.x).powi(2) + (p.y - q.y).powi(2)).sqrt();
                disp_n += 1.0;
                if k == sim.len() - 1 {
                    final_sum += ((p.x - q.x).powi(2) + (p.y - q.y).powi(2)).sqrt();
                    final_n += 1.0;
                }
            }
        }
    }
    o.msr /= n;
    o.cla /= n;
    o.lost_mean /= n;
    o.lost_fraction /= n;
    o.ade = disp_sum / disp_n;
    o.fde = final_sum / final_n;
    if !kills.is_empty() {
        o.ttk = Some(kills.iter().sum::<f64>() / kills.len() as f64);
    }
    o
}

fn rel_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

fn metric_oracles() -> Result<String, String> {
    let w = MetricWeights::default();
    let mut compared = 0;
    for i in 0..20u64 {
        let (record, plan) = metric_fixture(i);
        // Each fixture is checked alone and as part of a growing pool.
        let pool: Vec<(RolloutRecord, CandidatePlan)> = (0..=i).map(metric_fixture).collect();
        for records in [vec![record], pool.iter().map(|(r, _)| r.clone()).collect::<Vec<_>>()] {
            let expect = oracle(&records, &plan, &w);
            let msr = compute_msr(&records).map_err(|e| e.to_string())?;
            let cla = compute_cla(&records, &w).map_err(|e| e.to_string())?;
            let disp = compute_ade(&records, &plan).map_err(|e| e.to_string())?;
            let m = process_metrics(&records).map_err(|e| e.to_string())?;
            let n = records.len() as f64;
            let fail = |what: &str, got: String, want: String| format!("fixture {i} ({} records): {what} = {got}, oracle {want}", records.len());
            let floats = [
                ("msr", msr, expect.msr),
                ("cla", cla, expect.cla),
                ("ade", disp.ade, expect.ade),
                ("fde", disp.fde, expect.fde),
                ("pqs", compute_pqs(msr, cla, disp.ade, &w), expect.msr - 0.2 * expect.cla - 0.1 * expect.ade / (expect.ade + w.norm_x0)),
                ("suppression_rate_outcome", suppression_rate_outcome(msr), 1.0 - expect.msr),
                ("avg_platform_attrition", m.avg_platform_attrition, expect.lost_mean),
                ("attrition_fraction", m.attrition_fraction, expect.lost_fraction),
                ("avg_opponent_fire_fired", m.avg_opponent_fire_fired, expect.opp_fire as f64 / n),
                ("avg_opponent_fire_hits", m.avg_opponent_fire_hits, expect.opp_hit as f64 / n),
                ("missiles_launched", m.missiles_launched, expect.missiles as f64 / n),
                ("missile_hits", m.missile_hits, expect.missile_hits as f64 / n),
                ("missile_misses", m.missile_misses, expect.missile_misses as f64 / n),
            ];
            for (what, got, want) in floats {
                ensure(rel_close(got, want), || fail(what, got.to_string(), want.to_string()))?;
                compared += 1;
            }
            let counts = [
                ("opponent fired", m.opponent_fire.fired, expect.opp_fire),
                ("opponent hits", m.opponent_fire.hits, expect.opp_hit),
                ("plan-executing fired", m.plan_executing_fire.fired, expect.blue_fire),
                ("plan-executing hits", m.plan_executing_fire.hits, expect.blue_hit),
            ];
            for (what, got, want) in counts {
                ensure(got == want, || fail(what, got.to_string(), want.to_string()))?;
                compared += 1;
            }
            let rate = |h: u64, f: u64| (f > 0).then(|| h as f64 / f as f64);
            ensure(m.sr_process_opponent == rate(expect.opp_hit, expect.opp_fire), || fail("sr_process opponent", format!("{:?}", m.sr_process_opponent), String::new()))?;
            ensure(m.sr_process_plan_executing == rate(expect.blue_hit, expect.blue_fire), || fail("sr_process plan-executing", String::new(), String::new()))?;
            match (m.ttk_mean, expect.ttk) {
                (None, None) => {}
                (Some(a), Some(b)) if rel_close(a, b) => {}
                (a, b) => return Err(fail("ttk_mean", format!("{a:?}"), format!("{b:?}"))),
            }
            compared += 3;
        }
    }
    // Difficulty aggregates over even (easy) and odd (difficult) fixtures.
    let (easy, hard): (Vec<_>, Vec<_>) = (0..20u64).map(|i| metric_fixture(i).0).partition(|r| r.scenario_digest == "s0");
    let (e, d) = (compute_msr(&easy).unwrap(), compute_msr(&hard).unwrap());
    let (overall, robust) = success_aggregates(e, d);
    ensure(rel_close(overall, (e + d) / 2.0) && robust == e.min(d), || "fixture aggregates disagree".into())?;
    let (overall, robust) = success_aggregates(0.62, 0.60);
    ensure((overall - 0.61).abs() < 1e-12 && robust == 0.60, || format!("(0.62, 0.60) -> ({overall}, {robust})"))?;
    Ok(format!("20 fixtures, {compared} metric comparisons agree; (0.62, 0.60) -> ({overall:.2}, {robust:.2})"))
}

// ---------------------------------------------------------------------------

type Expected = Vec<(ViolationCode, &'static str, f64, f64)>;

fn broken_plans() -> Vec<(&'static str, Scenario, Vec<AtomicAction>, Expected)> {
    use ViolationCode::*;
    let near = |cs: ConstraintSet| scenario(vec![bomber("B", 100.0, 80.0, 10.0, 30.0, 8), command_center(110.0, 80.0)], cs);
    let budget = |n: u32| {
        let mut cs = ConstraintSet::default();
        cs.ammo_budget.insert("B".into(), n);
        cs
    };
    let bomber_limit = |v: f64| {
        let mut cs = ConstraintSet::default();
        cs.speed_limits.insert(EntityClass::Bomber, v);
        cs
    };
    let zone = ConstraintSet { no_fly_zones: vec![Circle { center: Vec2::new(60.0, 80.0), radius: 10.0 }], ..ConstraintSet::default() };
    let three = |cs: ConstraintSet, range: f64, cc: (f64, f64), at: [(f64, f64); 3]| {
        scenario(
            vec![
                bomber("B-1", at[0].0, at[0].1, 10.0, range, 4),
                bomber("B-2", at[1].0, at[1].1, 10.0, range, 4),
                bomber("B-3", at[2].0, at[2].1, 10.0, range, 4),
                command_center(cc.0, cc.1),
            ],
            cs,
        )
    };
    let launch = |who: &str, t: f64| AtomicAction::launch(who, t, "agm", "CC");
    vec![
        ("ammo", near(budget(4)), (1..=5).map(|k| launch("B", k as f64)).collect(), vec![(AmmoExceeded, "B", 5.0, 1.0)]),
        (
            "range",
            scenario(vec![bomber("B", 100.0, 80.0, 10.0, 10.0, 4), command_center(112.0, 80.0)], ConstraintSet::default()),
            vec![launch("B", 1.0)],
            vec![(OutOfRangeLaunch, "B", 1.0, 2.0)],
        ),
        (
            "speed",
            scenario(vec![bomber("B", 20.0, 80.0, 15.0, 10.0, 4), command_center(220.0, 80.0)], bomber_limit(12.0)),
            vec![AtomicAction::move_to("B", 0.0, Vec2::new(60.0, 80.0), 15.0)],
            vec![(SpeedExceeded, "B", 0.0, 3.0)],
        ),
        (
            "no-fly",
            scenario(vec![bomber("B", 20.0, 80.0, 15.0, 10.0, 4), command_center(220.0, 80.0)], zone.clone()),
            vec![AtomicAction::move_to("B", 0.0, Vec2::new(100.0, 80.0), 10.0)],
            vec![(NoFlyIncursion, "B", 3.1, 10.0)],
        ),
        ("timestamp", near(ConstraintSet::default()), vec![launch("B", 3.0), launch("B", 2.0)], vec![(TimestampDisorder, "B", 2.0, 1.0)]),
        (
            "salvo",
            three(ConstraintSet::default(), 30.0, (110.0, 80.0), [(100.0, 70.0), (100.0, 80.0), (100.0, 90.0)]),
            vec![launch("B-1", 2.0), launch("B-2", 2.0), launch("B-3", 2.0)],
            vec![(SalvoLimit, "B-3", 2.0, 1.0)],
        ),
        (
            "duration",
            near(ConstraintSet { max_plan_duration: Some(10.0), ..ConstraintSet::default() }),
            vec![launch("B", 12.0)],
            vec![(DurationExceeded, "B", 12.0, 2.0)],
        ),
        (
            "ammo+range+timestamp+duration",
            {
                let mut cs = budget(1);
                cs.max_plan_duration = Some(5.0);
                scenario(vec![bomber("B", 100.0, 80.0, 10.0, 10.0, 4), command_center(130.0, 80.0)], cs)
            },
            vec![launch("B", 6.0), launch("B", 4.0)],
            vec![
                (AmmoExceeded, "B", 6.0, 1.0),
                (OutOfRangeLaunch, "B", 4.0, 20.0),
                (OutOfRangeLaunch, "B", 6.0, 20.0),
                (TimestampDisorder, "B", 4.0, 2.0),
                (DurationExceeded, "B", 6.0, 1.0),
            ],
        ),
        (
            "range+salvo",
            three(ConstraintSet::default(), 10.0, (112.0, 80.0), [(100.0, 80.0), (124.0, 80.0), (112.0, 92.0)]),
            vec![launch("B-1", 2.0), launch("B-2", 2.0), launch("B-3", 2.0)],
            vec![
                (OutOfRangeLaunch, "B-1", 2.0, 2.0),
                (OutOfRangeLaunch, "B-2", 2.0, 2.0),
                (OutOfRangeLaunch, "B-3", 2.0, 2.0),
                (SalvoLimit, "B-3", 2.0, 1.0),
            ],
        ),
        (
            "no-fly+duration",
            scenario(vec![bomber("B", 20.0, 80.0, 15.0, 30.0, 4), command_center(110.0, 80.0)], zone),
            vec![AtomicAction::move_to("B", 0.0, Vec2::new(100.0, 80.0), 10.0), launch("B", 25.0)],
            vec![(NoFlyIncursion, "B", 3.1, 10.0), (DurationExceeded, "B", 25.0, 5.0)],
        ),
        (
            "ammo+salvo",
            {
                let mut cs = ConstraintSet::default();
                cs.ammo_budget.insert("B-1".into(), 1);
                three(cs, 30.0, (110.0, 80.0), [(100.0, 70.0), (100.0, 80.0), (100.0, 90.0)])
            },
            vec![launch("B-1", 1.0), launch("B-1", 2.0), launch("B-2", 2.0), launch("B-3", 2.0)],
            vec![(AmmoExceeded, "B-1", 2.0, 1.0), (SalvoLimit, "B-3", 2.0, 1.0)],
        ),
        (
            "speed+timestamp",
            near(bomber_limit(8.0)),
            vec![AtomicAction::move_to("B", 1.0, Vec2::new(100.0, 60.0), 10.0), launch("B", 0.5)],
            vec![(SpeedExceeded, "B", 1.0, 2.0), (TimestampDisorder, "B", 0.5, 0.5)],
        ),
    ]
}

fn validator_and_repair() -> Result<String, String> {
    let corpus = broken_plans();
    ensure(corpus.len() == 12, || format!("corpus has {} plans", corpus.len()))?;
    let mut covered: Vec<ViolationCode> = Vec::new();
    let (mut repaired, mut irreparable) = (0, 0);
    for (name, s, actions, expected) in &corpus {
        let plan = plan_of(name, actions.clone(), s);
        let got = validator_check(&plan, s);
        let matches = got.len() == expected.len()
            && got.iter().zip(expected).all(|(v, (code, actor, t, detail))| {
                v.code == *code && v.actor_id == *actor && (v.t - t).abs() < 1e-9 && (v.detail - detail).abs() < 1e-9
            });
        ensure(matches, || format!("{name}: got {got:?}, expected {expected:?}"))?;
        covered.extend(got.iter().map(|v| v.code));
        match repair_loop(plan, s, 3) {
            Ok((fixed, rounds)) => {
                ensure(rounds <= 3, || format!("{name}: {rounds} repair rounds"))?;
                let left = validator_check(&fixed, s);
                ensure(left.is_empty(), || format!("{name}: repaired plan still has {left:?}"))?;
                repaired += 1;
            }
            Err(PlanError::IrreparableViolation { .. }) => irreparable += 1,
            Err(e) => return Err(format!("{name}: repair failed with {e}")),
        }
    }
    ensure(ViolationCode::ALL.iter().all(|c| covered.contains(c)), || "corpus misses a violation code".into())?;

    let mut generated = 0;
    for s in [templates::easy(), templates::difficult()] {
        let intent = Intent::destroy(&s.core_target_id);
        for ablation in [None, Some(Ablation::Single), Some(Ablation::NoPf), Some(Ablation::NoAn), Some(Ablation::NoPl)] {
            let cfg = PlannerConfig { ablation, ..PlannerConfig::default() };
            let plans = generate_candidates(&intent, &s, 3, &cfg).map_err(|e| format!("{} {ablation:?}: {e}", s.name))?;
            for p in &plans {
                let v = validator_check(p, &s);
                ensure(v.is_empty(), || format!("{} {}: {v:?}", s.name, p.plan_id))?;
                generated += 1;
            }
        }
    }
    Ok(format!("12 broken plans match expected lists; {repaired} repaired within 3 rounds, {irreparable} irreparable; {generated} generated candidates clean"))
}

// ---------------------------------------------------------------------------

fn eva_sample(rng: &mut RngStream, i: usize) -> PredictionSample {
    let n = 1 + (rng.uniform() * 60.0) as usize;
    let annotations: Vec<TokenAnnotation> = (0..n)
        .map(|j| TokenAnnotation {
            entity_id: format!("E{j}"),
            value_class: if rng.uniform() < 0.3 { ValueClass::HighValue } else { ValueClass::Ordinary },
        })
        .collect();
    PredictionSample {
        sample_id: format!("s{i}"),
        plan_id: "p".into(),
        seed: i as u64,
        log_hash: String::new(),
        cut_tick: 0,
        history: String::new(),
        target: (0..n).map(|j| format!("token {j}\n")).collect(),
        annotations,
        target_positions: vec![Vec2::new(0.0, 0.0); n],
        entities_per_tick: n,
    }
}

fn eva_reduction() -> Result<String, String> {
    let mut rng = RngStream::new(0xe7a, 0);
    let unit = EvaConfig { w_b: 1.0, w_f: 1.0 };
    let base = EvaConfig { w_b: 2.5, w_f: 1.0 };
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let s = eva_sample(&mut rng, i);
        let lp: Vec<f64> = (0..s.annotations.len()).map(|_| (1.0 - rng.uniform()).ln()).collect();
        let mean_nll = -lp.iter().sum::<f64>() / lp.len() as f64;
        let got = weighted_nll(&s, &lp, &unit).map_err(|e| e.to_string())?;
        worst = worst.max((got - mean_nll).abs());
        let reference = weighted_nll(&s, &lp, &base).unwrap();
        for c in [0.25, 0.5, 2.0, 4.0, 1024.0] {
            let scaled = weighted_nll(&s, &lp, &EvaConfig { w_b: base.w_b * c, w_f: base.w_f * c }).unwrap();
            ensure(scaled == c * reference, || format!("fixture {i}: scaling by {c} gives {scaled}, expected {}", c * reference))?;
        }
    }
    ensure(worst <= 1e-12, || format!("unit weights deviate from mean NLL by {worst:e}"))?;
    let mut mixed = eva_sample(&mut rng, 100);
    mixed.annotations = (0..10)
        .map(|j| TokenAnnotation { entity_id: format!("E{j}"), value_class: if j < 3 { ValueClass::HighValue } else { ValueClass::Ordinary } })
        .collect();
    mixed.target = (0..10).map(|j| format!("token {j}\n")).collect();
    let sum: f64 = eva_token_weights(&mixed, &EvaConfig { w_b: 2.0, w_f: 1.0 }).unwrap().iter().sum();
    ensure(sum == 13.0, || format!("3 high-value + 7 ordinary tokens weigh {sum}"))?;
    Ok(format!("100 fixtures: unit weights within {worst:.1e} of mean NLL, scaling exact, mixed weight sum {sum}"))
}

// ---------------------------------------------------------------------------

const VARIANTS: [Option<Ablation>; 5] = [None, Some(Ablation::Single), Some(Ablation::NoPf), Some(Ablation::NoAn), Some(Ablation::NoPl)];

fn variant_name(a: Option<Ablation>) -> &'static str {
    a.map_or("full", |a| a.as_str())
}

fn records_for(plan: &CandidatePlan, s: &Scenario, opponent: &OpponentConfig) -> Result<Vec<RolloutRecord>, String> {
    let seeds: Vec<u64> = (1..=100).collect();
    let run = monte_carlo_verify(plan, s, opponent, &seeds, 0).map_err(|e| e.to_string())?;
    ensure(run.faults.is_empty(), || format!("{} faulted rollouts", run.faults.len()))?;
    Ok(run.records)
}

fn successes(records: &[RolloutRecord]) -> usize {
    records.iter().filter(|r| r.outcome == Outcome::Success).count()
}

/// Share of opponent shots aimed at high-value entities.
fn high_value_fire(records: &[RolloutRecord]) -> (usize, usize) {
    let (mut high, mut all) = (0, 0);
    for r in records {
        let class: BTreeMap<&str, (Side, ValueClass)> = r.tracks.iter().map(|t| (t.entity_id.as_str(), (t.side, t.value_class))).collect();
        for e in r.events.iter().filter(|e| e.kind == EventKind::Fire) {
            if class.get(e.actor_id.as_str()).map(|c| c.0) != Some(Side::Opponent) {
                continue;
            }
            all += 1;
            let target = e.target_id.as_deref().and_then(|t| class.get(t));
            high += (target.map(|c| c.1) == Some(ValueClass::HighValue)) as usize;
        }
    }
    (high, all)
}

fn directional_claims() -> Result<String, String> {
    let suite = templates::suite(10);
    // plans[scenario][variant]
    let plans: Vec<Vec<Vec<CandidatePlan>>> = suite
        .par_iter()
        .map(|s| {
            let intent = Intent::destroy(&s.core_target_id);
            VARIANTS
                .iter()
                .map(|&ablation| {
                    let cfg = PlannerConfig { ablation, ..PlannerConfig::default() };
                    generate_candidates(&intent, s, 3, &cfg).map_err(|e| format!("{} {}: {e}", s.name, variant_name(ablation)))
                })
                .collect::<Result<Vec<_>, String>>()
        })
        .collect::<Result<_, String>>()?;

    let nobrain = OpponentConfig::NoBrain;
    let predictive = OpponentConfig::predictive();
    let mut problems = Vec::new();
    let mut strict = 0;
    // Successes of each variant's top plan, summed over the suite.
    let mut top = [[0usize; 2]; VARIANTS.len()];
    for (s, per_variant) in suite.iter().zip(&plans) {
        let (mut nb, mut pr, mut n) = (0, 0, 0);
        for (v, candidates) in per_variant.iter().enumerate() {
            for (rank, p) in candidates.iter().enumerate() {
                let a = successes(&records_for(p, s, &nobrain)?);
                let b = successes(&records_for(p, s, &predictive)?);
                nb += a;
                pr += b;
                n += 100;
                if rank == 0 {
                    top[v][0] += a;
                    top[v][1] += b;
                }
            }
        }
        if pr > nb {
            problems.push(format!("(a) {}: predictive MSR {:.3} > nobrain {:.3}", s.name, pr as f64 / n as f64, nb as f64 / n as f64));
        }
        strict += (pr < nb) as usize;
    }
    if strict == 0 {
        problems.push("(a) no scenario with a strict decrease".into());
    }
    let total = 100.0 * suite.len() as f64;
    let table: Vec<String> = VARIANTS
        .iter()
        .zip(&top)
        .map(|(v, t)| format!("{} {:.3}/{:.3}", variant_name(*v), t[0] as f64 / total, t[1] as f64 / total))
        .collect();
    for (v, t) in VARIANTS.iter().zip(&top).skip(1) {
        for (k, opponent) in ["nobrain", "predictive"].iter().enumerate() {
            if t[k] > top[0][k] {
                problems.push(format!("(b) {} beats full under {opponent}: {} vs {} successes", variant_name(*v), t[k], top[0][k]));
            }
        }
    }

    let weighted = |w_b: f64| OpponentConfig::Predictive { h_pred: 20, w_b, w_f: 1.0 };
    let (mut low, mut high) = ((0, 0), (0, 0));
    for (s, per_variant) in suite.iter().zip(&plans) {
        for p in &per_variant[0] {
            let a = high_value_fire(&records_for(p, s, &weighted(1.0))?);
            let b = high_value_fire(&records_for(p, s, &weighted(4.0))?);
            low = (low.0 + a.0, low.1 + a.1);
            high = (high.0 + b.0, high.1 + b.1);
        }
    }
    let (f1, f4) = (low.0 as f64 / low.1.max(1) as f64, high.0 as f64 / high.1.max(1) as f64);
    if f4 < f1 {
        problems.push(format!("(c) high-value fire share fell from {f1:.4} to {f4:.4}"));
    }
    let summary = format!(
        "(a) {strict}/10 scenarios strictly lower under predictive; (b) top-plan MSR nobrain/predictive: {}; (c) high-value fire share {f1:.4} -> {f4:.4}",
        table.join(", ")
    );
    if problems.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{}; {summary}", problems.join("; ")))
    }
}

// ---------------------------------------------------------------------------

fn random_scenario(rng: &mut RngStream, i: usize) -> Scenario {
    let mut u = |lo: f64, hi: f64| lo + (hi - lo) * rng.uniform();
    let start = Vec2::new(u(10.0, 40.0), u(30.0, 130.0));
    let target = Vec2::new(u(190.0, 245.0), u(20.0, 140.0));
    let mut entities = vec![
        bomber("B-1", start.x, start.y, 20.0, 25.0, 4),
        bomber("B-2", start.x, (start.y + 10.0).min(150.0), 20.0, 25.0, 4),
        command_center(target.x, target.y),
    ];
    for k in 0..(1 + (u(0.0, 4.0) as usize)) {
        entities.push(
            entity(&format!("AAT-{k}"), Side::Opponent, EntityClass::AntiAirThreat, u(70.0, 200.0), u(10.0, 150.0), 80.0)
                .with_weapon(weapon("sam", 0.6, u(20.0, 40.0), 1.0, 35.0, 30)),
        );
    }
    let mut zones = Vec::new();
    for _ in 0..(u(0.0, 5.0) as usize) {
        let zone = Circle { center: Vec2::new(u(60.0, 180.0), u(0.0, 160.0)), radius: u(6.0, 22.0) };
        let clear = |p: Vec2| p.dist(zone.center) > zone.radius + 15.0;
        if entities.iter().all(|e| clear(e.position)) {
            zones.push(zone);
        }
    }
    let mut s = scenario(entities, ConstraintSet { no_fly_zones: zones, ..ConstraintSet::default() });
    s.name = format!("random-{i}");
    s
}

fn densify(points: &[Vec2], step: f64) -> Vec<Vec2> {
    let mut out = vec![points[0]];
    for w in points.windows(2) {
        let n = (w[0].dist(w[1]) / step).ceil().max(1.0) as usize;
        out.extend((1..=n).map(|k| w[0].lerp(w[1], k as f64 / n as f64)));
    }
    out
}

fn pathfinder_safety() -> Result<String, String> {
    let start = Instant::now();
    let mut rng = RngStream::new(0x9a7, 0);
    let cfg = PlannerConfig::default();
    let (mut routes, mut zones, mut unreachable) = (0, 0, 0);
    for i in 0..50 {
        let s = random_scenario(&mut rng, i);
        zones += s.constraint_set.no_fly_zones.len();
        let set = match pathfinder_topk(&Intent::destroy("CC"), &s, 3, &cfg) {
            Ok(set) => set,
            Err(PlanError::Unreachable) => {
                unreachable += 1;
                continue;
            }
            Err(e) => return Err(format!("{}: {e}", s.name)),
        };
        for r in &set.routes {
            for p in densify(&r.waypoints, 0.25) {
                for z in &s.constraint_set.no_fly_zones {
                    ensure(p.dist(z.center) >= z.radius, || format!("{} {}: point {p:?} inside zone {z:?}", s.name, r.route_id))?;
                }
            }
            for w in r.waypoints.windows(2) {
                for z in &s.constraint_set.no_fly_zones {
                    let d = point_segment_distance(z.center, w[0], w[1]);
                    ensure(d >= z.radius, || format!("{} {}: segment passes {d:.3} from a zone of radius {}", s.name, r.route_id, z.radius))?;
                }
            }
        }
        for (a, ra) in set.routes.iter().enumerate() {
            for rb in &set.routes[a + 1..] {
                ensure(ra.waypoints != rb.waypoints, || format!("{}: {} and {} are identical", s.name, ra.route_id, rb.route_id))?;
            }
        }
        routes += set.routes.len();
    }
    let took = within(Duration::from_secs(30), start, "50 searches")?;
    Ok(format!("50 scenarios, {zones} zones, {routes} routes clear and distinct, {unreachable} unreachable, {took:.2?}"))
}

// ---------------------------------------------------------------------------

fn main() {
    let criteria: [(&str, Check); 9] = [
        ("hit probability closed form", hit_probability_grid),
        ("hit-rate calibration", hit_rate_calibration),
        ("suppression mechanics", suppression_mechanics),
        ("determinism and worker independence", determinism_and_workers),
        ("metric oracles", metric_oracles),
        ("validator and repair", validator_and_repair),
        ("weighted loss reduction", eva_reduction),
        ("directional claims", directional_claims),
        ("pathfinder safety", pathfinder_safety),
    ];
    let wanted: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let number = i + 1;
        if !wanted.is_empty() && !wanted.contains(&number) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|panic| {
            let msg = panic.downcast_ref::<String>().cloned().or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let took = start.elapsed();
        match result {
            Ok(detail) => println!("PASS criterion {number} ({name}): {detail} [{took:.2?}]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {number} ({name}): {detail} [{took:.2?}]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criterion/criteria failed");
        std::process::exit(1);
    }
}
