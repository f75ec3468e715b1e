use tacsim_core::geom::{densify, Vec2};
use tacsim_core::{Scenario, Side};

#[derive(Debug, Clone, PartialEq)]
pub struct ThreatSource {
    pub entity_id: String,
    pub position: Vec2,
    pub p_base: f64,
    pub range: f64,
}

impl ThreatSource {
    pub fn at(&self, p: Vec2) -> f64 {
        self.p_base * (1.0 - p.dist(self.position) / self.range).max(0.0)
    }
}

/// Sum of linearly decaying engagement cones of all armed opponents.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ThreatField {
    pub sources: Vec<ThreatSource>,
}

impl ThreatField {
    /// Armed opponents at their initial positions.
    pub fn from_scenario(scenario: &Scenario) -> Self {
        let sources = scenario
            .side(Side::Opponent)
            .filter(|e| e.is_alive())
            .filter_map(|e| {
                let w = e.weapon.as_ref()?;
                Some(ThreatSource {
                    entity_id: e.id.clone(),
                    position: e.position,
                    p_base: w.p_base,
                    range: w.range,
                })
            })
            .collect();
        ThreatField { sources }
    }

    pub fn at(&self, p: Vec2) -> f64 {
        self.sources.iter().map(|s| s.at(p)).sum()
    }

    /// Trapezoid-rule line integral of the field along a polyline, sampled
    /// at most `step` apart (vertices always sampled).
    pub fn exposure(&self, polyline: &[Vec2], step: f64) -> f64 {
        let pts = densify(polyline, step);
        pts.windows(2)
            .map(|w| 0.5 * (self.at(w[0]) + self.at(w[1])) * w[0].dist(w[1]))
            .sum()
    }

    /// Largest field value over a densified polyline.
    pub fn peak(&self, polyline: &[Vec2], step: f64) -> f64 {
        densify(polyline, step)
            .into_iter()
            .map(|p| self.at(p))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(sources: &[(f64, f64, f64, f64)]) -> ThreatField {
        ThreatField {
            sources: sources
                .iter()
                .enumerate()
                .map(|(i, &(x, y, p, r))| ThreatSource {
                    entity_id: format!("T{i}"),
                    position: Vec2::new(x, y),
                    p_base: p,
                    range: r,
                })
                .collect(),
        }
    }

    #[test]
    fn zero_outside_every_range() {
        assert_eq!(
            field(&[(0.0, 0.0, 0.8, 10.0)]).at(Vec2::new(20.0, 0.0)),
            0.0
        );
    }

    #[test]
    fn full_weight_at_source() {
        assert_eq!(field(&[(5.0, 5.0, 0.8, 10.0)]).at(Vec2::new(5.0, 5.0)), 0.8);
    }

    #[test]
    fn overlapping_sources_add() {
        // 0.8 * (1 - 4/10) + 0.5 * (1 - 6/20)
        let f = field(&[(0.0, 0.0, 0.8, 10.0), (10.0, 0.0, 0.5, 20.0)]);
        assert!((f.at(Vec2::new(4.0, 0.0)) - (0.48 + 0.35)).abs() < 1e-12);
    }

    #[test]
    fn exposure_of_constant_region_is_length_times_value() {
        // Far from the source along a circle-free line the field is zero;
        // through the center the integral of a tent of height p and half
        // width R is p * R.
        let f = field(&[(50.0, 0.0, 0.6, 10.0)]);
        let through = f.exposure(&[Vec2::new(0.0, 0.0), Vec2::new(100.0, 0.0)], 0.5);
        assert!((through - 6.0).abs() < 1e-9, "{through}");
        assert_eq!(
            f.exposure(&[Vec2::new(0.0, 50.0), Vec2::new(100.0, 50.0)], 4.0),
            0.0
        );
    }
}
