//! Spherical path encoding and the composite path cost.
//!
//! A candidate solution is a flat vector of `3 * dv` reals, read as `dv`
//! triplets `(r, psi, phi)`: step length, climb angle and azimuth. Each
//! triplet moves the UAV from the previous waypoint (the start for the first
//! one). The cost combines path length, threat proximity, altitude keeping
//! and smoothness with the instance's weights.

mod cost;
mod decode;

use serde::{Deserialize, Serialize};

use crate::geometry::Point3;
use crate::instancegen::Instance;
use crate::scalar::Scalar;

pub use cost::{
    altitude_cost, evaluate_path, obstacle_cost, path_length, segment_threat_penalty,
    smoothness_cost, total_cost, ThreatPenalty,
};
pub use decode::{decode, search_bounds, step_length_bound};

/// Which threats a segment can be penalized by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThreatMode {
    /// Horizontal footprint only; the cylinder height is ignored.
    #[default]
    Projected,
    /// As `Projected`, but a segment whose both endpoints are above the
    /// cylinder top is not penalized.
    HeightGated,
}

/// How waypoints outside the altitude band are scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AltitudeMode {
    /// Each violating waypoint adds the instance's `j_pen`.
    #[default]
    Sentinel,
    /// Any violation makes the altitude cost infinite.
    Infinite,
}

/// Evaluation switches. The default is the shipped benchmark definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostConfig {
    pub threat_mode: ThreatMode,
    pub altitude_mode: AltitudeMode,
    /// Penalize the start->first and last->goal legs for threats as well.
    pub threat_endpoint_legs: bool,
    /// Include start and goal in the node sequence used for turn/climb angles.
    pub smoothness_endpoints: bool,
    /// Clamp decoded waypoints into the operating space.
    pub clamp: bool,
    /// Lowest decoded altitude above the local ground.
    pub z_floor: f64,
    /// Highest decoded altitude above the local ground; `None` is `2 * h_max`.
    pub z_ceiling: Option<f64>,
}

impl Default for CostConfig {
    fn default() -> Self {
        Self {
            threat_mode: ThreatMode::Projected,
            altitude_mode: AltitudeMode::Sentinel,
            threat_endpoint_legs: true,
            smoothness_endpoints: true,
            clamp: true,
            z_floor: 0.0,
            z_ceiling: None,
        }
    }
}

impl CostConfig {
    /// Segment and node indexing exactly as in the original cost formulas:
    /// internal segments only for threats, waypoints only for angles.
    pub fn literal() -> Self {
        Self {
            threat_endpoint_legs: false,
            smoothness_endpoints: false,
            ..Self::default()
        }
    }
}

/// Search-space encoding of a path: `(r, psi, phi)` per waypoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct SphericalPath<T> {
    pub triplets: Vec<[T; 3]>,
}

impl<T: Scalar> SphericalPath<T> {
    /// Reads consecutive `(r, psi, phi)` triplets; trailing values that do
    /// not form a full triplet are rejected.
    pub fn from_flat(x: &[T]) -> Option<Self> {
        if !x.len().is_multiple_of(3) {
            return None;
        }
        Some(Self {
            triplets: x.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect(),
        })
    }

    pub fn from_f64(x: &[f64]) -> Option<Self> {
        if !x.len().is_multiple_of(3) {
            return None;
        }
        Some(Self {
            triplets: x
                .chunks_exact(3)
                .map(|c| [T::lit(c[0]), T::lit(c[1]), T::lit(c[2])])
                .collect(),
        })
    }

    pub fn dv(&self) -> usize {
        self.triplets.len()
    }

    pub fn to_flat(&self) -> Vec<T> {
        self.triplets.iter().flatten().copied().collect()
    }
}

/// Decoded path: start, waypoints, goal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct CartesianPath<T> {
    pub start: Point3<T>,
    pub waypoints: Vec<Point3<T>>,
    pub goal: Point3<T>,
}

impl<T: Scalar> CartesianPath<T> {
    /// Start, waypoints and goal in flight order.
    pub fn nodes(&self) -> Vec<Point3<T>> {
        let mut v = Vec::with_capacity(self.waypoints.len() + 2);
        v.push(self.start);
        v.extend_from_slice(&self.waypoints);
        v.push(self.goal);
        v
    }
}

/// Per-component costs of one path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct CostBreakdown<T> {
    pub f1: T,
    pub f2: T,
    pub f3: T,
    pub f4: T,
    pub total: T,
    /// Number of (segment, threat) pairs inside the collision radius.
    pub violated_pairs: usize,
    /// Number of waypoints outside `[h_min, h_max]` above ground.
    pub altitude_violations: usize,
}

impl<T: Scalar> CostBreakdown<T> {
    pub fn to_f64(&self) -> CostBreakdown<f64> {
        CostBreakdown {
            f1: self.f1.as_f64(),
            f2: self.f2.as_f64(),
            f3: self.f3.as_f64(),
            f4: self.f4.as_f64(),
            total: self.total.as_f64(),
            violated_pairs: self.violated_pairs,
            altitude_violations: self.altitude_violations,
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.violated_pairs == 0 && self.altitude_violations == 0
    }
}

/// The path cost exposed as a black-box function of a flat `f64` vector,
/// evaluated internally in scalar type `T`.
#[derive(Debug, Clone)]
pub struct PathObjective<'a, T> {
    instance: &'a Instance<T>,
    dv: usize,
    config: CostConfig,
    bounds: Vec<(f64, f64)>,
}

impl<'a, T: Scalar> PathObjective<'a, T> {
    pub fn new(instance: &'a Instance<T>, dv: usize, config: CostConfig) -> Self {
        let bounds = search_bounds(instance, dv);
        Self {
            instance,
            dv,
            config,
            bounds,
        }
    }

    pub fn instance(&self) -> &Instance<T> {
        self.instance
    }

    pub fn dv(&self) -> usize {
        self.dv
    }

    pub fn dim(&self) -> usize {
        3 * self.dv
    }

    pub fn config(&self) -> &CostConfig {
        &self.config
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    /// Azimuth coordinates wrap around; the others do not.
    pub fn periodic(&self) -> Vec<bool> {
        (0..self.dim()).map(|i| i % 3 == 2).collect()
    }

    fn spherical(&self, x: &[f64]) -> SphericalPath<T> {
        assert_eq!(x.len(), self.dim(), "decision vector must have 3 * dv entries");
        SphericalPath::from_f64(x).expect("length checked")
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.breakdown(x).total.as_f64()
    }

    pub fn breakdown(&self, x: &[f64]) -> CostBreakdown<T> {
        total_cost(&self.spherical(x), self.instance, &self.config)
    }

    pub fn decode(&self, x: &[f64]) -> CartesianPath<T> {
        decode(&self.spherical(x), self.instance, &self.config)
    }
}
