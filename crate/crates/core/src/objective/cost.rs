use super::{decode, AltitudeMode, CartesianPath, CostBreakdown, CostConfig, SphericalPath, ThreatMode};
use crate::geometry::{horizontal_segment_distance, Point3};
use crate::instancegen::{Cylinder, Instance};
use crate::scalar::Scalar;

/// Horizontal projections shorter than this are treated as zero-length.
const DEGENERATE_LENGTH: f64 = 1e-12;

/// Penalty of one (segment, threat) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreatPenalty<T> {
    pub value: T,
    /// The segment passes within `D + R` of the threat axis.
    pub collision: bool,
}

impl<T: Scalar> ThreatPenalty<T> {
    /// Piecewise penalty for a segment at horizontal distance `d` from the
    /// threat axis: zero outside the danger annulus, linear inside it and
    /// `j_pen` inside the inflated radius.
    pub fn for_distance(d: T, radius: T, uav_diameter: T, danger_margin: T, j_pen: T) -> Self {
        let inner = uav_diameter + radius;
        let outer = danger_margin + inner;
        if d > outer {
            Self { value: T::zero(), collision: false }
        } else if d > inner {
            Self { value: outer - d, collision: false }
        } else {
            Self { value: j_pen, collision: true }
        }
    }
}

pub fn segment_threat_penalty<T: Scalar>(
    seg: (&Point3<T>, &Point3<T>),
    threat: &Cylinder<T>,
    uav_diameter: T,
    danger_margin: T,
    j_pen: T,
) -> T {
    let d = horizontal_segment_distance(seg.0, seg.1, threat.center_x, threat.center_y);
    ThreatPenalty::for_distance(d, threat.radius, uav_diameter, danger_margin, j_pen).value
}

/// Start leg, inter-waypoint segments and goal leg.
pub fn path_length<T: Scalar>(path: &CartesianPath<T>) -> T {
    path.nodes()
        .windows(2)
        .fold(T::zero(), |acc, w| acc + w[0].distance(&w[1]))
}

/// Sum of threat penalties over the penalized segments, and the number of
/// colliding (segment, threat) pairs.
pub fn obstacle_cost<T: Scalar>(path: &CartesianPath<T>, inst: &Instance<T>, cfg: &CostConfig) -> (T, usize) {
    let nodes = path.nodes();
    let segments = if cfg.threat_endpoint_legs {
        &nodes[..]
    } else {
        &nodes[1..nodes.len() - 1]
    };
    let mut total = T::zero();
    let mut violated = 0;
    for w in segments.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        for c in &inst.threats {
            if cfg.threat_mode == ThreatMode::HeightGated {
                let top = inst.terrain.height_at_clamped(c.center_x, c.center_y) + c.height;
                if a.z > top && b.z > top {
                    continue;
                }
            }
            let d = horizontal_segment_distance(a, b, c.center_x, c.center_y);
            let p = ThreatPenalty::for_distance(d, c.radius, inst.uav_diameter, inst.danger_margin, inst.j_pen);
            total = total + p.value;
            violated += usize::from(p.collision);
        }
    }
    (total, violated)
}

/// Deviation of each waypoint's height above ground from the middle of the
/// allowed band; waypoints outside the band score per the altitude mode.
pub fn altitude_cost<T: Scalar>(path: &CartesianPath<T>, inst: &Instance<T>, cfg: &CostConfig) -> (T, usize) {
    let mid = (inst.h_max + inst.h_min) / T::lit(2.0);
    let mut total = T::zero();
    let mut violations = 0;
    for p in &path.waypoints {
        let h = p.z - inst.terrain.height_at_clamped(p.x, p.y);
        if h >= inst.h_min && h <= inst.h_max {
            total = total + (h - mid).abs();
        } else {
            violations += 1;
            total = total
                + match cfg.altitude_mode {
                    AltitudeMode::Sentinel => inst.j_pen,
                    AltitudeMode::Infinite => T::infinity(),
                };
        }
    }
    (total, violations)
}

/// Climb angle of the segment `a -> b`, or `±pi/2` for a vertical one.
fn climb_angle<T: Scalar>(a: &Point3<T>, b: &Point3<T>) -> T {
    let run = a.horizontal_distance(b);
    let rise = b.z - a.z;
    if run < T::lit(DEGENERATE_LENGTH) {
        if rise > T::zero() {
            T::FRAC_PI_2()
        } else if rise < T::zero() {
            -T::FRAC_PI_2()
        } else {
            T::zero()
        }
    } else {
        (rise / run).atan()
    }
}

/// Turn angle at `b` between the horizontal projections of `a -> b` and
/// `b -> c`; zero when either projection is degenerate.
fn turn_angle<T: Scalar>(a: &Point3<T>, b: &Point3<T>, c: &Point3<T>) -> T {
    let (ux, uy) = (b.x - a.x, b.y - a.y);
    let (vx, vy) = (c.x - b.x, c.y - b.y);
    let (nu, nv) = (ux.hypot(uy), vx.hypot(vy));
    let eps = T::lit(DEGENERATE_LENGTH);
    if nu < eps || nv < eps {
        return T::zero();
    }
    // atan2 of (|u x v|, u . v) equals acos of the normalized dot product
    // without its loss of precision near 0 and pi.
    (ux * vy - uy * vx).abs().atan2(ux * vx + uy * vy)
}

/// Weighted sum of turn angles and climb-angle changes over interior nodes.
pub fn smoothness_cost<T: Scalar>(
    path: &CartesianPath<T>,
    beta_turn: T,
    beta_climb: T,
    include_endpoints: bool,
) -> T {
    let nodes = if include_endpoints {
        path.nodes()
    } else {
        path.waypoints.clone()
    };
    if nodes.len() < 3 {
        return T::zero();
    }
    let climbs: Vec<T> = nodes.windows(2).map(|w| climb_angle(&w[0], &w[1])).collect();
    let mut turns = T::zero();
    let mut climb_changes = T::zero();
    for j in 1..nodes.len() - 1 {
        turns = turns + turn_angle(&nodes[j - 1], &nodes[j], &nodes[j + 1]);
        climb_changes = climb_changes + (climbs[j] - climbs[j - 1]).abs();
    }
    beta_turn * turns + beta_climb * climb_changes
}

/// Scores an already decoded path.
pub fn evaluate_path<T: Scalar>(path: &CartesianPath<T>, inst: &Instance<T>, cfg: &CostConfig) -> CostBreakdown<T> {
    let f1 = path_length(path);
    let (f2, violated_pairs) = obstacle_cost(path, inst, cfg);
    let (f3, altitude_violations) = altitude_cost(path, inst, cfg);
    let f4 = smoothness_cost(path, inst.beta_turn, inst.beta_climb, cfg.smoothness_endpoints);
    let total = [f1, f2, f3, f4]
        .iter()
        .zip(inst.weights.iter())
        .filter(|(_, w)| **w != T::zero())
        .fold(T::zero(), |acc, (f, w)| acc + *w * *f);
    CostBreakdown {
        f1,
        f2,
        f3,
        f4,
        total,
        violated_pairs,
        altitude_violations,
    }
}

/// Decodes once and scores the path: the black-box objective.
pub fn total_cost<T: Scalar>(sp: &SphericalPath<T>, inst: &Instance<T>, cfg: &CostConfig) -> CostBreakdown<T> {
    evaluate_path(&decode(sp, inst, cfg), inst, cfg)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    use super::*;
    use crate::testutil::flat_instance;

    fn p(x: f64, y: f64, z: f64) -> Point3<f64> {
        Point3::new(x, y, z)
    }

    fn path(start: Point3<f64>, waypoints: Vec<Point3<f64>>, goal: Point3<f64>) -> CartesianPath<f64> {
        CartesianPath { start, waypoints, goal }
    }

    #[test]
    fn penalty_branches() {
        let f = |d| ThreatPenalty::for_distance(d, 5.0, 2.0, 10.0, 1e4);
        assert_eq!(f(20.0), ThreatPenalty { value: 0.0, collision: false });
        assert_eq!(f(12.0), ThreatPenalty { value: 5.0, collision: false });
        assert_eq!(f(6.0), ThreatPenalty { value: 1e4, collision: true });
        // boundaries: outer edge belongs to the annulus, inner edge to the collision
        assert_eq!(f(17.0).value, 0.0);
        assert_eq!(f(7.0).value, 1e4);
    }

    #[test]
    fn length_examples() {
        let l = path_length(&path(p(0.0, 0.0, 0.0), vec![p(3.0, 4.0, 0.0)], p(3.0, 4.0, 12.0)));
        assert_eq!(l, 17.0);
        let mid = path_length(&path(p(0.0, 0.0, 0.0), vec![p(1.0, 2.0, 2.0)], p(2.0, 4.0, 4.0)));
        assert!((mid - 6.0).abs() < 1e-12);
    }

    #[test]
    fn obstacle_cost_cases() {
        let mut inst = flat_instance(101, 0.0);
        let straight = path(p(0.0, 0.0, 70.0), vec![p(50.0, 0.0, 70.0)], p(100.0, 0.0, 70.0));
        assert_eq!(obstacle_cost(&straight, &inst, &CostConfig::default()), (0.0, 0));

        inst.threats.push(Cylinder { center_x: 60.0, center_y: 0.0, radius: 3.0, height: 50.0 });
        assert_eq!(obstacle_cost(&straight, &inst, &CostConfig::default()), (1e4, 1));
        // the literal indexing has no internal segment here
        let literal = CostConfig::literal();
        assert_eq!(obstacle_cost(&straight, &inst, &literal), (0.0, 0));

        // far away from the only threat
        let away = path(p(0.0, 100.0, 70.0), vec![p(0.0, 100.0, 70.0)], p(0.0, 100.0, 70.0));
        assert_eq!(obstacle_cost(&away, &inst, &CostConfig::default()), (0.0, 0));

        // above the cylinder top: only the gated mode lets it pass
        let high = path(p(0.0, 0.0, 70.0), vec![p(50.0, 0.0, 70.0)], p(100.0, 0.0, 70.0));
        let gated = CostConfig { threat_mode: ThreatMode::HeightGated, ..CostConfig::default() };
        assert_eq!(obstacle_cost(&high, &inst, &gated), (0.0, 0));
        inst.threats[0].height = 80.0;
        assert_eq!(obstacle_cost(&high, &inst, &gated), (1e4, 1));
    }

    #[test]
    fn altitude_cases() {
        let inst = flat_instance(101, 10.0);
        let one = |z: f64| path(p(0.0, 0.0, 80.0), vec![p(5.0, 5.0, z)], p(100.0, 100.0, 80.0));
        let cfg = CostConfig::default();
        assert_eq!(altitude_cost(&one(10.0 + 70.0), &inst, &cfg), (0.0, 0));
        assert_eq!(altitude_cost(&one(10.0 + 40.0), &inst, &cfg), (30.0, 0));
        assert_eq!(altitude_cost(&one(10.0 + 10.0), &inst, &cfg), (1e4, 1));
        let strict = CostConfig { altitude_mode: AltitudeMode::Infinite, ..cfg };
        let (f3, n) = altitude_cost(&one(10.0 + 10.0), &inst, &strict);
        assert!(f3.is_infinite() && n == 1);
    }

    #[test]
    fn smoothness_cases() {
        let straight = path(p(0.0, 0.0, 5.0), vec![p(1.0, 1.0, 5.0), p(2.0, 2.0, 5.0)], p(3.0, 3.0, 5.0));
        assert_eq!(smoothness_cost(&straight, 1.0, 1.0, true), 0.0);

        let corner = path(p(0.0, 0.0, 0.0), vec![p(1.0, 0.0, 0.0)], p(1.0, 1.0, 0.0));
        assert!((smoothness_cost(&corner, 1.0, 1.0, true) - FRAC_PI_2).abs() < 1e-15);

        let climb = path(p(0.0, 0.0, 0.0), vec![p(1.0, 0.0, 0.0)], p(2.0, 0.0, 1.0));
        assert!((smoothness_cost(&climb, 0.0, 1.0, true) - FRAC_PI_4).abs() < 1e-15);

        // a U-turn is a full pi; a vertical segment counts as a pi/2 climb
        let back = path(p(0.0, 0.0, 0.0), vec![p(1.0, 0.0, 0.0)], p(0.0, 0.0, 0.0));
        assert!((smoothness_cost(&back, 1.0, 0.0, true) - PI).abs() < 1e-15);
        let up = path(p(0.0, 0.0, 0.0), vec![p(1.0, 0.0, 0.0)], p(1.0, 0.0, 3.0));
        assert_eq!(smoothness_cost(&up, 1.0, 1.0, true), FRAC_PI_2);

        // literal indexing needs three waypoints for a single joint
        assert_eq!(smoothness_cost(&corner, 1.0, 1.0, false), 0.0);
    }

    #[test]
    fn straight_mid_altitude_path_costs_only_length() {
        let inst = flat_instance(101, 0.0);
        let dir = PI / 4.0;
        let step = inst.start.distance(&inst.goal) / 4.0;
        let sp = SphericalPath { triplets: vec![[step, 0.0, dir]; 3] };
        let b = total_cost(&sp, &inst, &CostConfig::default());
        let direct = inst.start.distance(&inst.goal);
        assert!((b.f1 - direct).abs() < 1e-9);
        assert_eq!((b.f2, b.violated_pairs, b.altitude_violations), (0.0, 0, 0));
        assert!(b.f3.abs() < 1e-9 && b.f4.abs() < 1e-9);
        assert!((b.total - 5.0 * direct).abs() < 1e-8);
    }

    #[test]
    fn weight_isolation() {
        let mut inst = flat_instance(101, 0.0);
        inst.threats.push(Cylinder { center_x: 40.0, center_y: 45.0, radius: 6.0, height: 10.0 });
        inst.weights = [0.0, 1.0, 0.0, 0.0];
        let sp = SphericalPath { triplets: vec![[30.0, 0.1, 0.7], [40.0, -0.2, 0.9], [20.0, 0.0, 0.1]] };
        let b = total_cost(&sp, &inst, &CostConfig::default());
        assert_eq!(b.total, b.f2);
        assert!(b.f2 > 0.0);
    }

    #[test]
    fn f32_and_f64_agree() {
        let mut inst = flat_instance(101, 0.0);
        inst.threats.push(Cylinder { center_x: 40.0, center_y: 45.0, radius: 6.0, height: 10.0 });
        let sp = SphericalPath { triplets: vec![[30.0, 0.1, 0.7], [40.0, -0.2, 0.9], [20.0, 0.0, 0.1]] };
        let b64 = total_cost(&sp, &inst, &CostConfig::default());
        let inst32 = inst.cast::<f32>();
        let sp32 = SphericalPath::<f32>::from_f64(&sp.to_flat()).unwrap();
        let b32 = total_cost(&sp32, &inst32, &CostConfig::default()).to_f64();
        assert_eq!(b32.violated_pairs, b64.violated_pairs);
        assert!((b32.total - b64.total).abs() < 1e-4 * b64.total);
    }
}
