use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{Cylinder, InstanceError, TerrainGrid};
use crate::seeding::rng_from_seed;

/// Sampling distribution and rejection rules for cylindrical threats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreatSampling {
    /// Radius range in world units.
    pub radius_range: [f64; 2],
    /// Cylinder height range in world units.
    pub height_range: [f64; 2],
    /// Padding added to every radius when testing corner clearance
    /// (UAV diameter plus danger margin).
    pub clearance: f64,
    /// Side of the square endpoint regions, as a fraction of the extent.
    pub corner_fraction: f64,
    /// Rejection-sampling attempts allowed per cylinder.
    pub max_attempts: usize,
}

impl ThreatSampling {
    pub fn validate(&self) -> Result<(), InstanceError> {
        let ordered = |r: [f64; 2]| r[0].is_finite() && r[1].is_finite() && r[0] > 0.0 && r[0] <= r[1];
        if !ordered(self.radius_range) || !ordered(self.height_range) {
            return Err(InstanceError::InvalidParams(
                "threat radius and height ranges must be positive and ordered".into(),
            ));
        }
        if !(self.clearance >= 0.0) || !(0.0..=0.5).contains(&self.corner_fraction) {
            return Err(InstanceError::InvalidParams(
                "clearance must be >= 0 and corner_fraction within [0, 0.5]".into(),
            ));
        }
        Ok(())
    }

    /// Centers of the four corner regions, in world coordinates.
    pub(crate) fn corner_centers(&self, extent: f64) -> [(f64, f64); 4] {
        let a = 0.5 * self.corner_fraction * extent;
        let b = extent - a;
        [(a, a), (a, b), (b, a), (b, b)]
    }
}

/// Rejection-samples `count` cylinders lying fully inside the terrain.
///
/// A cylinder is rejected when its padded footprint covers the center of any
/// of the four corner regions, so every corner keeps a point that is clear of
/// all danger zones.
pub fn place_threats(
    terrain: &TerrainGrid<f64>,
    count: usize,
    sampling: &ThreatSampling,
    seed: u64,
) -> Result<Vec<Cylinder<f64>>, InstanceError> {
    sampling.validate()?;
    let extent = terrain.extent();
    let [r_lo, r_hi] = sampling.radius_range;
    let [h_lo, h_hi] = sampling.height_range;
    if 2.0 * r_lo >= extent {
        return Err(InstanceError::InvalidParams(format!(
            "minimum threat radius {r_lo} does not fit in a terrain of extent {extent}"
        )));
    }
    let corners = sampling.corner_centers(extent);
    let mut rng = rng_from_seed(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut placed = None;
        for _ in 0..sampling.max_attempts.max(1) {
            let radius = rng.random_range(r_lo..=r_hi).min(0.5 * extent * (1.0 - 1e-9));
            let height = rng.random_range(h_lo..=h_hi);
            let cx = rng.random_range(radius..=extent - radius);
            let cy = rng.random_range(radius..=extent - radius);
            let reach = radius + sampling.clearance;
            let blocks_corner = corners
                .iter()
                .any(|&(x, y)| (x - cx).hypot(y - cy) <= reach);
            if !blocks_corner {
                placed = Some(Cylinder {
                    center_x: cx,
                    center_y: cy,
                    radius,
                    height,
                });
                break;
            }
        }
        match placed {
            Some(c) => out.push(c),
            None => {
                return Err(InstanceError::ThreatPlacement {
                    placed: out.len(),
                    requested: count,
                })
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sampling(extent: f64) -> ThreatSampling {
        ThreatSampling {
            radius_range: [0.03 * extent, 0.08 * extent],
            height_range: [20.0, 360.0],
            clearance: 1.0 + 0.05 * extent,
            corner_fraction: 0.1,
            max_attempts: 10_000,
        }
    }

    #[test]
    fn zero_count_is_empty() {
        let t = TerrainGrid::flat(900, 1.0, 0.0);
        assert!(place_threats(&t, 0, &sampling(899.0), 1).unwrap().is_empty());
    }

    #[test]
    fn deterministic_and_inside() {
        let t = TerrainGrid::flat(900, 1.0, 0.0);
        let s = sampling(t.extent());
        let a = place_threats(&t, 15, &s, 42).unwrap();
        assert_eq!(a, place_threats(&t, 15, &s, 42).unwrap());
        assert_ne!(a, place_threats(&t, 15, &s, 43).unwrap());

        let dense = place_threats(&t, 30, &s, 7).unwrap();
        assert_eq!(dense.len(), 30);
        let e = t.extent();
        for c in &dense {
            assert!(c.center_x - c.radius >= 0.0 && c.center_x + c.radius <= e);
            assert!(c.center_y - c.radius >= 0.0 && c.center_y + c.radius <= e);
            assert!(c.height >= 20.0 && c.height <= 360.0);
            for (x, y) in s.corner_centers(e) {
                assert!(c.axis_distance(x, y) > c.radius + s.clearance);
            }
        }
    }

    #[test]
    fn impossible_placement_fails() {
        let t = TerrainGrid::flat(50, 1.0, 0.0);
        let s = ThreatSampling {
            radius_range: [20.0, 24.0],
            clearance: 30.0,
            max_attempts: 50,
            ..sampling(49.0)
        };
        assert!(matches!(
            place_threats(&t, 3, &s, 1),
            Err(InstanceError::ThreatPlacement { placed: 0, requested: 3 })
        ));
        let bad = ThreatSampling {
            radius_range: [5.0, 2.0],
            ..sampling(49.0)
        };
        assert!(place_threats(&t, 1, &bad, 1).is_err());
    }
}
