//! Trajectory overlays: planned versus simulated paths plus opponent tracks.

use std::fmt::Write as _;
use tacsim_core::sim::RolloutRecord;
use tacsim_core::{CandidatePlan, Scenario, Side, Vec2};

/// Long-form CSV: `tick,entity_id,side,kind,x,y` where `kind` is `planned`
/// or `simulated`.
pub fn overlay_csv(plan: &CandidatePlan, record: &RolloutRecord) -> String {
    let mut out = String::from("tick,entity_id,side,kind,x,y\n");
    for (id, points) in &plan.planned_trajectories {
        for (k, p) in points.iter().enumerate() {
            let _ = writeln!(out, "{k},{id},plan_executing,planned,{},{}", p.x, p.y);
        }
    }
    for t in &record.tracks {
        let side = match t.side {
            Side::PlanExecuting => "plan_executing",
            Side::Opponent => "opponent",
        };
        for (k, p) in t.positions.iter().enumerate() {
            let _ = writeln!(out, "{k},{},{side},simulated,{},{}", t.entity_id, p.x, p.y);
        }
    }
    out
}

const SCALE: f64 = 4.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn polyline(points: &[Vec2], height: f64, style: &str) -> String {
    let coords: Vec<String> = points.iter().map(|p| format!("{:.1},{:.1}", p.x * SCALE, (height - p.y) * SCALE)).collect();
    format!("  <polyline points=\"{}\" fill=\"none\" {style}/>\n", coords.join(" "))
}

/// SVG of the map with no-fly zones, opponent weapon ranges, planned paths
/// (dashed), simulated plan-executing paths (solid blue) and opponent paths
/// (red). The y axis points up.
pub fn overlay_svg(plan: &CandidatePlan, record: &RolloutRecord, scenario: &Scenario) -> String {
    let (w, h) = (scenario.map_width, scenario.map_height);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0}\" height=\"{:.0}\" viewBox=\"0 0 {:.0} {:.0}\">",
        w * SCALE,
        h * SCALE,
        w * SCALE,
        h * SCALE
    );
    let _ = writeln!(out, "  <title>{} seed {}</title>", escape(&plan.plan_id), record.seed.base_seed);
    let _ = writeln!(out, "  <rect width=\"100%\" height=\"100%\" fill=\"white\" stroke=\"black\"/>");
    for z in &scenario.constraint_set.no_fly_zones {
        let _ = writeln!(
            out,
            "  <circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"{:.1}\" fill=\"#999\" fill-opacity=\"0.4\"/>",
            z.center.x * SCALE,
            (h - z.center.y) * SCALE,
            z.radius * SCALE
        );
    }
    for e in scenario.side(Side::Opponent) {
        let (x, y) = (e.position.x * SCALE, (h - e.position.y) * SCALE);
        if let Some(wpn) = &e.weapon {
            let _ = writeln!(
                out,
                "  <circle cx=\"{x:.1}\" cy=\"{y:.1}\" r=\"{:.1}\" fill=\"red\" fill-opacity=\"0.08\" stroke=\"red\" stroke-opacity=\"0.3\"/>",
                wpn.range * SCALE
            );
        }
        let _ = writeln!(out, "  <text x=\"{x:.1}\" y=\"{y:.1}\" font-size=\"10\">{}</text>", escape(&e.id));
    }
    for points in plan.planned_trajectories.values() {
        out.push_str(&polyline(points, h, "stroke=\"#36c\" stroke-dasharray=\"6 4\" stroke-width=\"1.5\""));
    }
    for t in &record.tracks {
        let style = match t.side {
            Side::PlanExecuting => "stroke=\"#036\" stroke-width=\"2\"",
            Side::Opponent => "stroke=\"#c00\" stroke-width=\"1.5\"",
        };
        out.push_str(&polyline(&t.positions, h, style));
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{strike_plan, strike_scenario};
    use tacsim_core::opponents::OpponentConfig;
    use tacsim_core::sim::{run_rollout, SeedInfo};

    fn rollout() -> (Scenario, CandidatePlan, RolloutRecord) {
        let s = strike_scenario(true);
        let plan = strike_plan("p<1>", &s, 1);
        let mut policy = OpponentConfig::NoBrain.build();
        let r = run_rollout(&s, &plan, policy.as_mut(), SeedInfo::from_seed(3)).unwrap();
        (s, plan, r)
    }

    #[test]
    fn csv_has_one_row_per_point() {
        let (_, plan, r) = rollout();
        let csv = overlay_csv(&plan, &r);
        let planned: usize = plan.planned_trajectories.values().map(Vec::len).sum();
        let simulated: usize = r.tracks.iter().map(|t| t.positions.len()).sum();
        assert_eq!(csv.lines().count(), 1 + planned + simulated);
        assert!(csv.starts_with("tick,entity_id,side,kind,x,y\n0,B,plan_executing,planned,20,80\n"));
        assert!(csv.contains("\n0,AAT,opponent,simulated,110,80\n"));
    }

    #[test]
    fn svg_draws_every_path_and_escapes_text() {
        let (s, plan, r) = rollout();
        let svg = overlay_svg(&plan, &r, &s);
        assert_eq!(svg.matches("<polyline").count(), plan.planned_trajectories.len() + r.tracks.len());
        assert!(svg.contains("<title>p&lt;1&gt; seed 3</title>"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
