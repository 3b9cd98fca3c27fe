use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{Cylinder, InstanceError, TerrainGrid};
use crate::geometry::Point3;
use crate::seeding::rng_from_seed;

/// Geometry of the start/goal corner regions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointConfig {
    /// Side of each square corner region as a fraction of the extent.
    pub corner_fraction: f64,
    /// Radius padding (UAV diameter plus danger margin) that endpoints must clear.
    pub clearance: f64,
    /// Altitude of the endpoints above the local ground.
    pub altitude: f64,
    /// Random candidates tried before falling back to a grid scan.
    pub random_candidates: usize,
}

const SCAN_RESOLUTION: usize = 64;

fn is_clear(threats: &[Cylinder<f64>], clearance: f64, x: f64, y: f64) -> bool {
    threats
        .iter()
        .all(|c| c.axis_distance(x, y) > c.radius + clearance)
}

/// Finds a point of the square `[x0, x0+side] x [y0, y0+side]` clear of all
/// danger zones, preferring its center.
fn place_in_corner(
    threats: &[Cylinder<f64>],
    cfg: &EndpointConfig,
    (x0, y0): (f64, f64),
    side: f64,
    rng: &mut crate::seeding::Rng,
) -> Option<(f64, f64)> {
    let center = (x0 + 0.5 * side, y0 + 0.5 * side);
    if is_clear(threats, cfg.clearance, center.0, center.1) {
        return Some(center);
    }
    for _ in 0..cfg.random_candidates {
        let x = x0 + side * rng.random::<f64>();
        let y = y0 + side * rng.random::<f64>();
        if is_clear(threats, cfg.clearance, x, y) {
            return Some((x, y));
        }
    }
    let step = side / (SCAN_RESOLUTION - 1) as f64;
    (0..SCAN_RESOLUTION)
        .flat_map(|i| (0..SCAN_RESOLUTION).map(move |j| (x0 + i as f64 * step, y0 + j as f64 * step)))
        .find(|&(x, y)| is_clear(threats, cfg.clearance, x, y))
}

/// Places start and goal in diagonally opposite corner regions; the seed
/// picks which diagonal is used.
pub fn place_endpoints(
    terrain: &TerrainGrid<f64>,
    threats: &[Cylinder<f64>],
    cfg: &EndpointConfig,
    seed: u64,
) -> Result<(Point3<f64>, Point3<f64>), InstanceError> {
    let extent = terrain.extent();
    let side = cfg.corner_fraction * extent;
    let far = extent - side;
    let mut rng = rng_from_seed(seed);
    let (start_corner, goal_corner) = if rng.random::<bool>() {
        ((0.0, 0.0), (far, far))
    } else {
        ((0.0, far), (far, 0.0))
    };
    let lift = |(x, y): (f64, f64)| Point3::new(x, y, terrain.height_at_clamped(x, y) + cfg.altitude);
    let start = place_in_corner(threats, cfg, start_corner, side, &mut rng)
        .ok_or(InstanceError::UnplaceableEndpoint { which: "start" })?;
    let goal = place_in_corner(threats, cfg, goal_corner, side, &mut rng)
        .ok_or(InstanceError::UnplaceableEndpoint { which: "goal" })?;
    Ok((lift(start), lift(goal)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> EndpointConfig {
        EndpointConfig {
            corner_fraction: 0.1,
            clearance: 5.0,
            altitude: 70.0,
            random_candidates: 256,
        }
    }

    #[test]
    fn no_threats_uses_corner_centers() {
        let t = TerrainGrid::flat(101, 1.0, 10.0);
        let (s, g) = place_endpoints(&t, &[], &cfg(), 3).unwrap();
        let a = [s.x, s.y, g.x, g.y];
        // corners at 5% / 95% of the extent
        for v in a {
            assert!(v == 5.0 || v == 95.0, "{v}");
        }
        assert_eq!(s.x + g.x, 100.0);
        assert_eq!(s.y + g.y, 100.0);
        assert_eq!(s.z, 80.0);
        assert_eq!(g.z, 80.0);
    }

    #[test]
    fn blocked_center_is_displaced_within_corner() {
        let t = TerrainGrid::flat(101, 1.0, 0.0);
        let (s0, _) = place_endpoints(&t, &[], &cfg(), 3).unwrap();
        let blocker = Cylinder {
            center_x: s0.x,
            center_y: s0.y,
            radius: 1.0,
            height: 10.0,
        };
        let (s, _) = place_endpoints(&t, &[blocker], &cfg(), 3).unwrap();
        assert!(blocker.axis_distance(s.x, s.y) > 1.0 + 5.0);
        let lo_x = if s0.x < 50.0 { 0.0 } else { 90.0 };
        let lo_y = if s0.y < 50.0 { 0.0 } else { 90.0 };
        assert!(s.x >= lo_x && s.x <= lo_x + 10.0);
        assert!(s.y >= lo_y && s.y <= lo_y + 10.0);
    }

    #[test]
    fn fully_covered_corner_fails() {
        let t = TerrainGrid::flat(101, 1.0, 0.0);
        let walls: Vec<_> = [(5.0, 5.0), (5.0, 95.0), (95.0, 5.0), (95.0, 95.0)]
            .iter()
            .map(|&(x, y)| Cylinder {
                center_x: x,
                center_y: y,
                radius: 20.0,
                height: 1.0,
            })
            .collect();
        assert!(matches!(
            place_endpoints(&t, &walls, &cfg(), 1),
            Err(InstanceError::UnplaceableEndpoint { which: "start" })
        ));
    }

    #[test]
    fn deterministic() {
        let t = TerrainGrid::flat(101, 1.0, 0.0);
        let threats = vec![Cylinder {
            center_x: 50.0,
            center_y: 50.0,
            radius: 10.0,
            height: 3.0,
        }];
        let a = place_endpoints(&t, &threats, &cfg(), 11).unwrap();
        assert_eq!(a, place_endpoints(&t, &threats, &cfg(), 11).unwrap());
    }
}
