//! Experiment execution: plans, per-cell runs, the run log and trace exports.
//!
//! A plan is the cartesian product instances × optimizers × DV × budgets ×
//! seeds. Each cell runs one optimizer on one instance with
//! `3 * dv * base_budget` evaluations. Finished cells are appended to
//! `runs.jsonl` in the output directory, one record per line, with the trace
//! also written as `traces/<cell>.csv`; a re-run skips cells already logged.

mod exec;
mod export;
mod log;
mod plan;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Point3;
use crate::instancegen::{DensityClass, InstanceError};
use crate::objective::CostBreakdown;
use crate::optimizers::{OptimizerError, OptimizerSpec, Trace};

pub use exec::{run_cell, run_cells, run_plan, CellOutcome, PlanSummary};
pub use export::{export_traces, linear_grid, write_trace_csv, write_trajectories, TraceRow, TraceTable, UNDEFINED};
pub use log::{read_failures, read_records, RunLog};
pub use plan::{CellKey, ExperimentPlan, WallCapScope};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("cell {cell}: {source}")]
    Optimizer {
        cell: String,
        #[source]
        source: OptimizerError,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> HarnessError {
    let path = path.into();
    move |source| HarnessError::Io { path, source }
}

/// Evaluation budget of a cell.
pub fn evaluation_budget(dv: usize, base_budget: u64) -> usize {
    3 * dv * base_budget as usize
}

/// Outcome of one successful cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance_id: String,
    pub density_class: DensityClass,
    /// Display name of the optimizer (its label, or its name).
    pub optimizer: String,
    pub spec: OptimizerSpec,
    pub dv: usize,
    pub base_budget: u64,
    pub seed: u64,
    pub budget: usize,
    pub best_value: f64,
    pub best_vector: Vec<f64>,
    pub evals_used: usize,
    pub wall_seconds: f64,
    pub truncated: bool,
    pub trace: Trace,
    pub cost_breakdown: CostBreakdown<f64>,
    /// Decoded best path: start, waypoints, goal.
    pub best_path: Vec<Point3<f64>>,
}

impl RunRecord {
    pub fn key(&self) -> CellKey {
        CellKey {
            instance_id: self.instance_id.clone(),
            optimizer: self.optimizer.clone(),
            dv: self.dv,
            base_budget: self.base_budget,
            seed: self.seed,
        }
    }
}

/// A cell that did not produce a record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub cell: CellKey,
    pub error: String,
}
