//! Procedural benchmark instances: terrains, cylindrical threats, start/goal
//! placement and the on-disk instance format.
//!
//! Everything here is a pure function of its parameters and seed, so a suite
//! can be regenerated bit-for-bit from its manifest.

mod endpoints;
mod io;
mod suite;
mod terrain;
mod threats;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Point3;
use crate::scalar::Scalar;

pub use endpoints::{place_endpoints, EndpointConfig};
pub use io::{
    deserialize_instance, load_instance, load_manifest, load_suite, serialize_instance,
    write_suite, SuiteManifest, SuiteProvenance,
};
pub use suite::{build_suite, build_suite_with, default_terrain_params, SuiteConfig};
pub use terrain::{generate_terrain, TerrainGrid, TerrainParams, MAX_ITERATIONS};
pub use threats::{place_threats, ThreatSampling};

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("invalid terrain parameters: {0}")]
    InvalidParams(String),
    #[error("point ({x}, {y}) lies outside the terrain [0, {extent}]^2")]
    OutOfBounds { x: f64, y: f64, extent: f64 },
    #[error("placed only {placed} of {requested} threats within the retry limit")]
    ThreatPlacement { placed: usize, requested: usize },
    #[error("cannot place {which} point: corner region fully covered by danger zones")]
    UnplaceableEndpoint { which: &'static str },
    #[error("failed to parse instance at `{field}`: {message}")]
    Parse { field: String, message: String },
    #[error("invalid instance field `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("instance {id}: {source}")]
    Context {
        id: String,
        #[source]
        source: Box<InstanceError>,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl InstanceError {
    pub(crate) fn with_id(self, id: &str) -> Self {
        InstanceError::Context {
            id: id.to_string(),
            source: Box::new(self),
        }
    }
}

/// Vertical cylinder acting as a no-fly threat. Only its footprint enters
/// the obstacle penalty unless height gating is enabled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct Cylinder<T> {
    #[serde(rename = "cx")]
    pub center_x: T,
    #[serde(rename = "cy")]
    pub center_y: T,
    #[serde(rename = "r")]
    pub radius: T,
    /// Height of the top above the ground elevation at the center.
    #[serde(rename = "h")]
    pub height: T,
}

impl<T: Scalar> Cylinder<T> {
    pub fn cast<U: Scalar>(&self) -> Cylinder<U> {
        Cylinder {
            center_x: U::lit(self.center_x.as_f64()),
            center_y: U::lit(self.center_y.as_f64()),
            radius: U::lit(self.radius.as_f64()),
            height: U::lit(self.height.as_f64()),
        }
    }

    /// Horizontal distance from the cylinder axis to `(x, y)`.
    pub fn axis_distance(&self, x: T, y: T) -> T {
        (x - self.center_x).hypot(y - self.center_y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DensityClass {
    Low,
    High,
}

impl DensityClass {
    /// Generated suites use 15 threats for low and 30 for high density.
    pub fn for_threat_count(count: usize) -> Self {
        if count <= 15 {
            DensityClass::Low
        } else {
            DensityClass::High
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            DensityClass::Low => "low",
            DensityClass::High => "high",
        }
    }
}

/// One benchmark problem: terrain, threats, endpoints and the cost
/// parameters needed to evaluate a path on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct Instance<T> {
    pub id: String,
    pub terrain: TerrainGrid<T>,
    pub threats: Vec<Cylinder<T>>,
    pub start: Point3<T>,
    pub goal: Point3<T>,
    pub h_min: T,
    pub h_max: T,
    pub uav_diameter: T,
    /// Width of the danger annulus around each inflated threat.
    pub danger_margin: T,
    pub j_pen: T,
    pub weights: [T; 4],
    pub beta_turn: T,
    pub beta_climb: T,
    pub density_class: DensityClass,
}

impl<T: Scalar> Instance<T> {
    /// Checks the structural invariants of an instance.
    pub fn validate(&self) -> Result<(), InstanceError> {
        self.terrain.validate()?;
        let invalid = |field: &'static str, reason: String| Err(InstanceError::Invalid { field, reason });
        if !(self.h_min < self.h_max) {
            return invalid("h_min", format!("h_min {} must be below h_max {}", self.h_min, self.h_max));
        }
        if !(self.j_pen > T::zero()) || !self.j_pen.is_finite() {
            return invalid("j_pen", format!("must be positive and finite, got {}", self.j_pen));
        }
        if self.weights.iter().any(|w| !(*w >= T::zero()) || !w.is_finite()) {
            return invalid("weights", "all weights must be finite and >= 0".into());
        }
        for (name, v) in [
            ("uav_diameter", self.uav_diameter),
            ("danger_margin", self.danger_margin),
            ("beta_turn", self.beta_turn),
            ("beta_climb", self.beta_climb),
        ] {
            if !(v >= T::zero()) || !v.is_finite() {
                return invalid(name, format!("must be finite and >= 0, got {v}"));
            }
        }
        let extent = self.terrain.extent();
        for (k, c) in self.threats.iter().enumerate() {
            let ok = c.radius > T::zero()
                && c.height > T::zero()
                && c.center_x >= T::zero()
                && c.center_x <= extent
                && c.center_y >= T::zero()
                && c.center_y <= extent;
            if !ok {
                return invalid("threats", format!("threat {k} has invalid geometry"));
            }
        }
        for (name, p) in [("start", self.start), ("goal", self.goal)] {
            if !(p.x >= T::zero() && p.x <= extent && p.y >= T::zero() && p.y <= extent) || !p.z.is_finite() {
                return invalid(name, "outside the terrain".into());
            }
        }
        Ok(())
    }

    /// Inflated-radius clearance of `(x, y)` is positive for every threat,
    /// i.e. the point lies strictly outside all danger zones.
    pub fn outside_danger_zones(&self, x: T, y: T) -> bool {
        let pad = self.danger_margin + self.uav_diameter;
        self.threats
            .iter()
            .all(|c| c.axis_distance(x, y) > c.radius + pad)
    }

    /// Converts every real field to another scalar type.
    pub fn cast<U: Scalar>(&self) -> Instance<U> {
        let u = |v: T| U::lit(v.as_f64());
        Instance {
            id: self.id.clone(),
            terrain: self.terrain.cast(),
            threats: self.threats.iter().map(Cylinder::cast).collect(),
            start: self.start.cast(),
            goal: self.goal.cast(),
            h_min: u(self.h_min),
            h_max: u(self.h_max),
            uav_diameter: u(self.uav_diameter),
            danger_margin: u(self.danger_margin),
            j_pen: u(self.j_pen),
            weights: self.weights.map(u),
            beta_turn: u(self.beta_turn),
            beta_climb: u(self.beta_climb),
            density_class: self.density_class,
        }
    }
}
