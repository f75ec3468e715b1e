//! Threat-aware route search on an 8-connected lattice.

use crate::threat::ThreatField;
use crate::{PlanError, PlannerConfig};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use tacsim_core::geom::{densify, polyline_length, Circle, Vec2};
use tacsim_core::{Intent, Scenario, Side};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteSkeleton {
    pub route_id: String,
    pub waypoints: Vec<Vec2>,
    pub length: f64,
    pub threat_exposure: f64,
    pub score: f64,
}

impl RouteSkeleton {
    /// Build a route and compute its length, exposure and score.
    pub fn new(
        route_id: impl Into<String>,
        waypoints: Vec<Vec2>,
        field: &ThreatField,
        cfg: &PlannerConfig,
    ) -> Self {
        let length = polyline_length(&waypoints);
        let threat_exposure = field.exposure(&waypoints, cfg.cell_size);
        RouteSkeleton {
            route_id: route_id.into(),
            score: route_score(length, threat_exposure, cfg),
            waypoints,
            length,
            threat_exposure,
        }
    }
}

pub fn route_score(length: f64, exposure: f64, cfg: &PlannerConfig) -> f64 {
    -cfg.w_len * length - cfg.w_threat * exposure
}

/// Result of a top-K search. `unreachable` is set when fewer than K
/// distinct routes could be extracted.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteSet {
    pub routes: Vec<RouteSkeleton>,
    pub unreachable: bool,
}

/// Centroid of the bombers (or of all plan-executing entities if there are none).
pub fn start_point(scenario: &Scenario) -> Vec2 {
    let bombers: Vec<Vec2> = scenario
        .side(Side::PlanExecuting)
        .filter(|e| e.class == tacsim_core::EntityClass::Bomber)
        .map(|e| e.position)
        .collect();
    let pts = if bombers.is_empty() {
        scenario
            .side(Side::PlanExecuting)
            .map(|e| e.position)
            .collect()
    } else {
        bombers
    };
    let n = pts.len().max(1) as f64;
    pts.iter().fold(Vec2::ZERO, |acc, p| acc + *p) * (1.0 / n)
}

/// Zones grown by the planning clearance.
pub fn inflated_zones(scenario: &Scenario, clearance: f64) -> Vec<Circle> {
    scenario
        .constraint_set
        .no_fly_zones
        .iter()
        .map(|z| Circle {
            center: z.center,
            radius: z.radius + clearance,
        })
        .collect()
}

pub fn segment_clear(a: Vec2, b: Vec2, zones: &[Circle]) -> bool {
    zones.iter().all(|z| !z.intersects_segment(a, b))
}

struct Lattice<'a> {
    cols: usize,
    rows: usize,
    cell: f64,
    threat: Vec<f64>,
    blocked: Vec<bool>,
    zones: &'a [Circle],
}

const NEIGHBORS: [(i64, i64); 8] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
];

impl<'a> Lattice<'a> {
    fn new(scenario: &Scenario, field: &ThreatField, zones: &'a [Circle], cell: f64) -> Self {
        let cols = (scenario.map_width / cell).floor() as usize + 1;
        let rows = (scenario.map_height / cell).floor() as usize + 1;
        let mut threat = Vec::with_capacity(cols * rows);
        let mut blocked = Vec::with_capacity(cols * rows);
        for r in 0..rows {
            for c in 0..cols {
                let p = Vec2::new(c as f64 * cell, r as f64 * cell);
                threat.push(field.at(p));
                blocked.push(zones.iter().any(|z| z.contains(p)));
            }
        }
        Lattice {
            cols,
            rows,
            cell,
            threat,
            blocked,
            zones,
        }
    }

    fn point(&self, n: usize) -> Vec2 {
        Vec2::new(
            (n % self.cols) as f64 * self.cell,
            (n / self.cols) as f64 * self.cell,
        )
    }

    fn neighbors(&self, n: usize) -> impl Iterator<Item = usize> + '_ {
        let (c, r) = ((n % self.cols) as i64, (n / self.cols) as i64);
        NEIGHBORS.iter().filter_map(move |(dc, dr)| {
            let (nc, nr) = (c + dc, r + dr);
            if nc < 0 || nr < 0 || nc >= self.cols as i64 || nr >= self.rows as i64 {
                return None;
            }
            let m = nr as usize * self.cols + nc as usize;
            (!self.blocked[m] && segment_clear(self.point(n), self.point(m), self.zones))
                .then_some(m)
        })
    }

    fn edge_cost(&self, a: usize, b: usize, w_threat: f64) -> f64 {
        self.point(a).dist(self.point(b))
            * (1.0 + w_threat * 0.5 * (self.threat[a] + self.threat[b]))
    }

    /// Free node nearest to `p` that can be reached from `p` in a straight line.
    fn snap(&self, p: Vec2) -> Option<usize> {
        (0..self.cols * self.rows)
            .filter(|&n| !self.blocked[n] && segment_clear(p, self.point(n), self.zones))
            .min_by(|&a, &b| {
                self.point(a)
                    .dist(p)
                    .total_cmp(&self.point(b).dist(p))
                    .then(a.cmp(&b))
            })
    }
}

#[derive(PartialEq)]
struct Open {
    f: f64,
    g: f64,
    node: usize,
}

impl Eq for Open {}

impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// A* with a straight-line heuristic; admissible because every edge costs at
/// least its length.
fn search(
    lat: &Lattice,
    start: usize,
    goal: usize,
    w_threat: f64,
    inflation: &HashMap<(usize, usize), f64>,
) -> Option<Vec<usize>> {
    let n = lat.cols * lat.rows;
    let mut g = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut heap = BinaryHeap::new();
    let goal_pt = lat.point(goal);
    g[start] = 0.0;
    heap.push(Open {
        f: lat.point(start).dist(goal_pt),
        g: 0.0,
        node: start,
    });
    while let Some(Open { g: gn, node, .. }) = heap.pop() {
        if gn > g[node] {
            continue;
        }
        if node == goal {
            let mut path = vec![goal];
            let mut cur = goal;
            while cur != start {
                cur = parent[cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for m in lat.neighbors(node) {
            let factor = inflation.get(&edge_key(node, m)).copied().unwrap_or(1.0);
            let cand = gn + lat.edge_cost(node, m, w_threat) * factor;
            if cand < g[m] {
                g[m] = cand;
                parent[m] = node;
                heap.push(Open {
                    f: cand + lat.point(m).dist(goal_pt),
                    g: cand,
                    node: m,
                });
            }
        }
    }
    None
}

/// Cost of a straight segment under the same cost model as lattice edges,
/// integrating the threat term.
fn straight_cost(a: Vec2, b: Vec2, field: &ThreatField, w_threat: f64, step: f64) -> f64 {
    a.dist(b) + w_threat * field.exposure(&[a, b], step)
}

/// String-pulling: replace runs of lattice nodes by straight segments when
/// the shortcut stays clear of zones and is no costlier than the lattice
/// sub-path it replaces.
fn smooth(
    points: &[Vec2],
    field: &ThreatField,
    zones: &[Circle],
    cfg: &PlannerConfig,
) -> Vec<Vec2> {
    let step = cfg.cell_size / 2.0;
    let mut cumulative = vec![0.0];
    for w in points.windows(2) {
        let last = *cumulative.last().unwrap();
        cumulative.push(last + straight_cost(w[0], w[1], field, cfg.w_threat, step));
    }
    let mut out = vec![points[0]];
    let mut i = 0;
    while i + 1 < points.len() {
        let mut j = points.len() - 1;
        while j > i + 1 {
            let lattice_cost = cumulative[j] - cumulative[i];
            if segment_clear(points[i], points[j], zones)
                && straight_cost(points[i], points[j], field, cfg.w_threat, step)
                    <= lattice_cost * (1.0 + 1e-9)
            {
                break;
            }
            j -= 1;
        }
        out.push(points[j]);
        i = j;
    }
    out.dedup_by(|a, b| a.dist(*b) < 1e-9);
    out
}

/// Up to `k` distinct routes from the bombers' centroid to the core target,
/// best score first.
pub fn pathfinder_topk(
    intent: &Intent,
    scenario: &Scenario,
    k: usize,
    cfg: &PlannerConfig,
) -> Result<RouteSet, PlanError> {
    let k = k.max(1);
    let field = ThreatField::from_scenario(scenario);
    let zones = inflated_zones(scenario, cfg.clearance);
    let lat = Lattice::new(scenario, &field, &zones, cfg.cell_size);
    let start = start_point(scenario);
    let goal = scenario
        .entity(&intent.core_target_id)
        .ok_or_else(|| PlanError::UnknownTarget(intent.core_target_id.clone()))?
        .position;
    let (Some(s), Some(g)) = (lat.snap(start), lat.snap(goal)) else {
        return Err(PlanError::Unreachable);
    };

    let mut inflation: HashMap<(usize, usize), f64> = HashMap::new();
    let mut found: Vec<Vec<Vec2>> = Vec::new();
    let max_attempts = 4 * k + 4;
    for _ in 0..max_attempts {
        if found.len() == k {
            break;
        }
        let Some(path) = search(&lat, s, g, cfg.w_threat, &inflation) else {
            break;
        };
        for w in path.windows(2) {
            *inflation.entry(edge_key(w[0], w[1])).or_insert(1.0) *= cfg.rho;
        }
        let mut pts = vec![start];
        pts.extend(path.iter().map(|&n| lat.point(n)));
        pts.push(goal);
        pts.dedup_by(|a, b| a.dist(*b) < 1e-9);
        let route = smooth(&pts, &field, &zones, cfg);
        if !found.contains(&route) {
            found.push(route);
        }
    }
    if found.is_empty() {
        return Err(PlanError::Unreachable);
    }
    let unreachable = found.len() < k;
    let mut routes: Vec<RouteSkeleton> = found
        .into_iter()
        .enumerate()
        .map(|(i, w)| RouteSkeleton::new(format!("route-{i}"), w, &field, cfg))
        .collect();
    routes.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.route_id.cmp(&b.route_id))
    });
    Ok(RouteSet {
        routes,
        unreachable,
    })
}

/// Smoothed zone-avoiding path between two points, weighting threat by
/// `w_threat`. A clear straight segment is returned as is.
pub fn lattice_path(
    from: Vec2,
    to: Vec2,
    scenario: &Scenario,
    cfg: &PlannerConfig,
    w_threat: f64,
) -> Option<Vec<Vec2>> {
    let zones = inflated_zones(scenario, cfg.clearance);
    if w_threat == 0.0 && segment_clear(from, to, &zones) {
        return Some(vec![from, to]);
    }
    let field = if w_threat == 0.0 {
        ThreatField::default()
    } else {
        ThreatField::from_scenario(scenario)
    };
    let lat = Lattice::new(scenario, &field, &zones, cfg.cell_size);
    let (s, g) = (lat.snap(from)?, lat.snap(to)?);
    let path = search(&lat, s, g, w_threat, &HashMap::new())?;
    let mut pts = vec![from];
    pts.extend(path.iter().map(|&n| lat.point(n)));
    pts.push(to);
    pts.dedup_by(|a, b| a.dist(*b) < 1e-9);
    let local = PlannerConfig {
        w_threat,
        ..cfg.clone()
    };
    Some(smooth(&pts, &field, &zones, &local))
}

/// The straight line from the bombers' centroid to the core target.
pub fn direct_route(
    intent: &Intent,
    scenario: &Scenario,
    cfg: &PlannerConfig,
) -> Result<RouteSkeleton, PlanError> {
    let goal = scenario
        .entity(&intent.core_target_id)
        .ok_or_else(|| PlanError::UnknownTarget(intent.core_target_id.clone()))?
        .position;
    let field = ThreatField::from_scenario(scenario);
    Ok(RouteSkeleton::new(
        "direct",
        vec![start_point(scenario), goal],
        &field,
        cfg,
    ))
}

/// Whether any densified sample of `polyline` lies inside a zone.
pub fn crosses_zone(polyline: &[Vec2], zones: &[Circle], spacing: f64) -> bool {
    densify(polyline, spacing)
        .iter()
        .any(|p| zones.iter().any(|z| z.contains(*p)))
}
