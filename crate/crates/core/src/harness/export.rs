use std::path::Path;

use super::{io_err, CellKey, HarnessError, RunRecord};
use crate::optimizers::Trace;

/// Marker written for grid points before a run's first evaluation.
pub const UNDEFINED: &str = "NA";

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub cell: CellKey,
    /// Best-so-far at each grid point; `None` before the first milestone.
    pub values: Vec<Option<f64>>,
}

/// Traces resampled onto a shared evaluation grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceTable {
    pub grid: Vec<usize>,
    pub rows: Vec<TraceRow>,
}

/// `points` evenly spaced evaluation counts ending at `max_evals`.
pub fn linear_grid(max_evals: usize, points: usize) -> Vec<usize> {
    let points = points.max(1);
    let mut grid: Vec<usize> = (1..=points)
        .map(|k| ((k as f64 / points as f64) * max_evals as f64).round() as usize)
        .filter(|&e| e > 0)
        .collect();
    grid.dedup();
    grid
}

/// Step-function resampling of every record's trace onto `grid`.
pub fn export_traces(records: &[RunRecord], grid: &[usize]) -> TraceTable {
    TraceTable {
        grid: grid.to_vec(),
        rows: records
            .iter()
            .map(|r| TraceRow {
                cell: r.key(),
                values: grid.iter().map(|&e| r.trace.value_at(e)).collect(),
            })
            .collect(),
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> HarnessError + '_ {
    move |e| HarnessError::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| UNDEFINED.to_string(), |x| x.to_string())
}

/// Milestones as `evals,best_so_far`.
pub fn write_trace_csv(path: &Path, trace: &Trace) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(["evals", "best_so_far"]).map_err(csv_err(path))?;
    for &(e, f) in &trace.milestones {
        w.write_record([e.to_string(), f.to_string()]).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

impl TraceTable {
    /// One file per row in `dir`, columns `evals,best_so_far`.
    pub fn write_per_cell(&self, dir: &Path) -> Result<Vec<std::path::PathBuf>, HarnessError> {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        let mut paths = Vec::with_capacity(self.rows.len());
        for row in &self.rows {
            let path = dir.join(format!("{}.csv", row.cell.file_stem()));
            let mut w = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
            w.write_record(["evals", "best_so_far"]).map_err(csv_err(&path))?;
            for (&e, &v) in self.grid.iter().zip(&row.values) {
                w.write_record([e.to_string(), fmt_opt(v)]).map_err(csv_err(&path))?;
            }
            w.flush().map_err(io_err(&path))?;
            paths.push(path);
        }
        Ok(paths)
    }

    /// All rows in one long-format file.
    pub fn write_long(&self, path: &Path) -> Result<(), HarnessError> {
        let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
        w.write_record(["instance_id", "optimizer", "dv", "base_budget", "seed", "evals", "best_so_far"])
            .map_err(csv_err(path))?;
        for row in &self.rows {
            let c = &row.cell;
            for (&e, &v) in self.grid.iter().zip(&row.values) {
                w.write_record([
                    c.instance_id.clone(),
                    c.optimizer.clone(),
                    c.dv.to_string(),
                    c.base_budget.to_string(),
                    c.seed.to_string(),
                    e.to_string(),
                    fmt_opt(v),
                ])
                .map_err(csv_err(path))?;
            }
        }
        w.flush().map_err(io_err(path))
    }
}

/// Decoded best paths, one row per node, for trajectory plots.
pub fn write_trajectories(records: &[RunRecord], path: &Path) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(["instance_id", "optimizer", "dv", "base_budget", "seed", "node", "x", "y", "z", "best_value"])
        .map_err(csv_err(path))?;
    for r in records {
        for (k, p) in r.best_path.iter().enumerate() {
            w.write_record([
                r.instance_id.clone(),
                r.optimizer.clone(),
                r.dv.to_string(),
                r.base_budget.to_string(),
                r.seed.to_string(),
                k.to_string(),
                p.x.to_string(),
                p.y.to_string(),
                p.z.to_string(),
                r.best_value.to_string(),
            ])
            .map_err(csv_err(path))?;
        }
    }
    w.flush().map_err(io_err(path))
}
