//! Benchmarking toolkit for global optimizers on a UAV path-planning problem.
//!
//! The crate generates terrain/threat instances ([`instancegen`]), scores
//! candidate paths with a four-part composite cost ([`objective`]), runs a
//! roster of optimizers under evaluation budgets ([`optimizers`],
//! [`harness`]) and analyses the results ([`stats`], [`ela`]).
//!
//! Geometry and cost evaluation are generic over [`Scalar`] (`f32`/`f64`);
//! the aliases below fix the scalar to `f64`, the type used by the on-disk
//! formats and the optimizers.

// `!(a < b)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ela;
pub mod geometry;
pub mod harness;
pub mod instancegen;
pub mod objective;
pub mod optimizers;
pub mod scalar;
pub mod stats;
pub mod seeding;

#[cfg(test)]
mod testutil;

pub use scalar::Scalar;

pub type Point3 = geometry::Point3<f64>;
pub type TerrainGrid = instancegen::TerrainGrid<f64>;
pub type Cylinder = instancegen::Cylinder<f64>;
pub type Instance = instancegen::Instance<f64>;

pub type SphericalPath = objective::SphericalPath<f64>;
pub type CartesianPath = objective::CartesianPath<f64>;
pub type CostBreakdown = objective::CostBreakdown<f64>;

pub type Instance32 = instancegen::Instance<f32>;
