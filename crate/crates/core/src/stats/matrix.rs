use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::harness::RunRecord;
use crate::instancegen::DensityClass;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("results matrix is not rectangular: {0}")]
    NotRectangular(String),
    #[error("non-finite value for instance {instance}, method {method}")]
    NonFinite { instance: String, method: String },
    #[error("instance {0}: best value is not positive, relative errors are undefined")]
    NonPositiveBest(String),
    #[error("need at least {needed} {what}, got {got}")]
    TooSmall { what: &'static str, needed: usize, got: usize },
    #[error("samples differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("matrices do not cover the same instances and methods")]
    Mismatched,
    #[error("no records for dv={dv}, base budget={budget}")]
    NoRecords { dv: usize, budget: u64 },
}

/// Best objective value per (instance, method) at one (DV, budget) setting.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultsMatrix {
    pub instances: Vec<String>,
    pub methods: Vec<String>,
    /// `values[i][j]`: instance `i`, method `j`.
    pub values: Vec<Vec<f64>>,
    /// Density class per instance, when known.
    pub density: Vec<Option<DensityClass>>,
}

impl ResultsMatrix {
    pub fn new(instances: Vec<String>, methods: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self, StatsError> {
        let density = vec![None; instances.len()];
        let m = Self {
            instances,
            methods,
            values,
            density,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), StatsError> {
        if self.values.len() != self.instances.len() || self.density.len() != self.instances.len() {
            return Err(StatsError::NotRectangular(format!(
                "{} instance ids, {} rows",
                self.instances.len(),
                self.values.len()
            )));
        }
        for (i, row) in self.values.iter().enumerate() {
            if row.len() != self.methods.len() {
                return Err(StatsError::NotRectangular(format!(
                    "instance {} has {} values for {} methods",
                    self.instances[i],
                    row.len(),
                    self.methods.len()
                )));
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(StatsError::NonFinite {
                    instance: self.instances[i].clone(),
                    method: self.methods[j].clone(),
                });
            }
        }
        Ok(())
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.iter().map(|r| r[j]).collect()
    }

    /// Builds the matrix for one (dv, base budget) from run records. Several
    /// seeds for one cell are averaged. Instances and methods are sorted by
    /// name; a missing (instance, method) pair is an error.
    pub fn from_records(records: &[RunRecord], dv: usize, base_budget: u64) -> Result<Self, StatsError> {
        let mut acc: BTreeMap<(&str, &str), (f64, usize)> = BTreeMap::new();
        let mut instances = BTreeMap::new();
        let mut methods = BTreeSet::new();
        for r in records.iter().filter(|r| r.dv == dv && r.base_budget == base_budget) {
            let e = acc.entry((r.instance_id.as_str(), r.optimizer.as_str())).or_insert((0.0, 0));
            e.0 += r.best_value;
            e.1 += 1;
            instances.insert(r.instance_id.as_str(), r.density_class);
            methods.insert(r.optimizer.as_str());
        }
        if acc.is_empty() {
            return Err(StatsError::NoRecords { dv, budget: base_budget });
        }
        let mut values = Vec::with_capacity(instances.len());
        for &inst in instances.keys() {
            let mut row = Vec::with_capacity(methods.len());
            for &m in &methods {
                let &(sum, n) = acc.get(&(inst, m)).ok_or_else(|| {
                    StatsError::NotRectangular(format!("no record for instance {inst}, method {m}"))
                })?;
                row.push(sum / n as f64);
            }
            values.push(row);
        }
        let m = Self {
            density: instances.values().map(|&d| Some(d)).collect(),
            instances: instances.keys().map(|s| s.to_string()).collect(),
            methods: methods.iter().map(|s| s.to_string()).collect(),
            values,
        };
        m.validate()?;
        Ok(m)
    }
}
