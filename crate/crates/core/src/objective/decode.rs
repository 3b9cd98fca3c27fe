use super::{CartesianPath, CostConfig, SphericalPath};
use crate::geometry::Point3;
use crate::instancegen::Instance;
use crate::scalar::Scalar;

/// Upper bound of the step length: twice the direct distance split evenly
/// over the waypoints.
pub fn step_length_bound<T: Scalar>(inst: &Instance<T>, dv: usize) -> f64 {
    2.0 * inst.start.distance(&inst.goal).as_f64() / dv.max(1) as f64
}

/// Box bounds of the flat decision vector for `dv` waypoints.
pub fn search_bounds<T: Scalar>(inst: &Instance<T>, dv: usize) -> Vec<(f64, f64)> {
    let r_max = step_length_bound(inst, dv);
    let half_pi = std::f64::consts::FRAC_PI_2;
    let pi = std::f64::consts::PI;
    (0..dv)
        .flat_map(|_| [(0.0, r_max), (-half_pi, half_pi), (-pi, pi)])
        .collect()
}

/// Chains the spherical steps from the start point. With clamping enabled,
/// each waypoint is pulled back into the terrain footprint and its altitude
/// into `[ground + z_floor, ground + z_ceiling]` before the next step.
pub fn decode<T: Scalar>(sp: &SphericalPath<T>, inst: &Instance<T>, cfg: &CostConfig) -> CartesianPath<T> {
    let extent = inst.terrain.extent();
    let floor = T::lit(cfg.z_floor);
    let ceiling = cfg.z_ceiling.map(T::lit).unwrap_or(inst.h_max + inst.h_max);
    let mut prev = inst.start;
    let mut waypoints = Vec::with_capacity(sp.dv());
    for &[r, psi, phi] in &sp.triplets {
        let horizontal = r * psi.cos();
        let mut p = Point3::new(
            prev.x + horizontal * phi.cos(),
            prev.y + horizontal * phi.sin(),
            prev.z + r * psi.sin(),
        );
        if cfg.clamp {
            p.x = p.x.max(T::zero()).min(extent);
            p.y = p.y.max(T::zero()).min(extent);
            let ground = inst.terrain.height_at_clamped(p.x, p.y);
            p.z = p.z.max(ground + floor).min(ground + ceiling);
        }
        waypoints.push(p);
        prev = p;
    }
    CartesianPath {
        start: inst.start,
        waypoints,
        goal: inst.goal,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::flat_instance;

    #[test]
    fn zero_angles_move_along_x() {
        let inst = flat_instance(101, 0.0);
        let sp = SphericalPath { triplets: vec![[10.0, 0.0, 0.0]] };
        let p = decode(&sp, &inst, &CostConfig::default());
        assert_eq!(p.waypoints, vec![Point3::new(10.0, 0.0, 70.0)]);
    }

    #[test]
    fn vertical_climb_before_clamping() {
        let inst = flat_instance(101, 0.0);
        let sp = SphericalPath {
            triplets: vec![[10.0, std::f64::consts::FRAC_PI_2, 0.0]],
        };
        let raw = CostConfig {
            clamp: false,
            ..CostConfig::default()
        };
        let p = decode(&sp, &inst, &raw).waypoints[0];
        assert!(p.x.abs() < 1e-12 && p.y.abs() < 1e-12);
        assert_eq!(p.z, 80.0);
    }

    #[test]
    fn clamping_keeps_points_in_the_operating_space() {
        let inst = flat_instance(101, 5.0);
        let sp = SphericalPath {
            triplets: vec![[500.0, 0.0, std::f64::consts::PI], [400.0, 1.2, 0.7], [300.0, -1.5, 0.1]],
        };
        let p = decode(&sp, &inst, &CostConfig::default());
        for w in &p.waypoints {
            assert!(w.x >= 0.0 && w.x <= 100.0 && w.y >= 0.0 && w.y <= 100.0);
            assert!(w.z >= 5.0 && w.z <= 5.0 + 240.0);
        }
        assert_eq!(p.waypoints[0].x, 0.0);
    }

    #[test]
    fn bounds_layout() {
        let inst = flat_instance(101, 0.0);
        let b = search_bounds(&inst, 4);
        assert_eq!(b.len(), 12);
        let r_max = 2.0 * inst.start.distance(&inst.goal) / 4.0;
        assert_eq!(b[0], (0.0, r_max));
        assert_eq!(b[4].0, -std::f64::consts::FRAC_PI_2);
        assert_eq!(b[11].1, std::f64::consts::PI);
    }
}
