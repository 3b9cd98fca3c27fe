use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

/// Why a run stopped before its algorithm finished on its own.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stop {
    Budget,
    WallClock,
}

/// Best-so-far value at each improvement, keyed by evaluations used.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Trace {
    pub milestones: Vec<(usize, f64)>,
}

impl Trace {
    /// Step-function (last observation carried forward) value at `evals`;
    /// `None` before the first milestone.
    pub fn value_at(&self, evals: usize) -> Option<f64> {
        let idx = self.milestones.partition_point(|&(e, _)| e <= evals);
        idx.checked_sub(1).map(|i| self.milestones[i].1)
    }

    pub fn final_value(&self) -> Option<f64> {
        self.milestones.last().map(|m| m.1)
    }

    pub fn is_monotone(&self) -> bool {
        self.milestones
            .windows(2)
            .all(|w| w[1].0 > w[0].0 && !(w[1].1 > w[0].1))
    }
}

/// A black-box minimization problem over a box.
pub struct Problem<'f> {
    pub bounds: Vec<(f64, f64)>,
    /// Coordinates that wrap around (angles); only some methods use this.
    pub periodic: Vec<bool>,
    pub func: &'f (dyn Fn(&[f64]) -> f64 + Sync),
}

impl<'f> Problem<'f> {
    pub fn new(bounds: Vec<(f64, f64)>, func: &'f (dyn Fn(&[f64]) -> f64 + Sync)) -> Self {
        let periodic = vec![false; bounds.len()];
        Self { bounds, periodic, func }
    }

    pub fn with_periodic(mut self, periodic: Vec<bool>) -> Self {
        assert_eq!(periodic.len(), self.bounds.len());
        self.periodic = periodic;
        self
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }
}

/// Counting wrapper handed to optimizers. Enforces the evaluation budget,
/// checks bounds and records the incumbent and its trace.
pub struct ObjectiveHandle<'p, 'f> {
    problem: &'p Problem<'f>,
    budget: usize,
    evals: usize,
    started: Instant,
    deadline: Option<Instant>,
    truncated: bool,
    best_x: Vec<f64>,
    best_f: f64,
    trace: Trace,
    population: Vec<(usize, usize)>,
}

impl<'p, 'f> ObjectiveHandle<'p, 'f> {
    pub fn new(problem: &'p Problem<'f>, budget: usize, wall_cap: Option<Duration>) -> Self {
        let started = Instant::now();
        Self {
            problem,
            budget,
            evals: 0,
            started,
            deadline: wall_cap.map(|d| started + d),
            truncated: false,
            best_x: Vec::new(),
            best_f: f64::INFINITY,
            trace: Trace::default(),
            population: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.problem.dim()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.problem.bounds
    }

    pub fn periodic(&self) -> &[bool] {
        &self.problem.periodic
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn evals(&self) -> usize {
        self.evals
    }

    pub fn remaining(&self) -> usize {
        self.budget - self.evals
    }

    pub fn best(&self) -> (&[f64], f64) {
        (&self.best_x, self.best_f)
    }

    /// Evaluates `x`, failing once the budget is spent.
    ///
    /// # Panics
    /// If `x` has the wrong length or lies outside the bounds: that is a bug
    /// in the calling optimizer.
    pub fn evaluate(&mut self, x: &[f64]) -> Result<f64, Stop> {
        if self.evals >= self.budget {
            return Err(Stop::Budget);
        }
        assert_eq!(x.len(), self.dim(), "candidate has wrong dimension");
        for (i, (&v, &(lo, hi))) in x.iter().zip(&self.problem.bounds).enumerate() {
            assert!(v >= lo && v <= hi, "coordinate {i} = {v} outside [{lo}, {hi}]");
        }
        self.evals += 1;
        let f = (self.problem.func)(x);
        // NaN never becomes the incumbent
        if f < self.best_f || self.best_x.is_empty() && !f.is_nan() {
            self.best_f = f;
            self.best_x.clear();
            self.best_x.extend_from_slice(x);
            self.trace.milestones.push((self.evals, f));
        }
        Ok(f)
    }

    /// Checks the wall-clock cap; called between iterations.
    pub fn check_time(&mut self) -> Result<(), Stop> {
        if self.evals >= self.budget {
            return Err(Stop::Budget);
        }
        if let Some(deadline) = self.deadline {
            if Instant::now() >= deadline {
                self.truncated = true;
                return Err(Stop::WallClock);
            }
        }
        Ok(())
    }

    /// Records the population size in effect after `evals` evaluations.
    pub fn record_population(&mut self, size: usize) {
        self.population.push((self.evals, size));
    }

    pub(crate) fn finish(mut self) -> OptimizationResult {
        if let Some(&(last, f)) = self.trace.milestones.last() {
            if self.evals > last {
                self.trace.milestones.push((self.evals, f));
            }
        }
        OptimizationResult {
            best_x: self.best_x,
            best_f: self.best_f,
            trace: self.trace,
            evals_used: self.evals,
            truncated: self.truncated,
            wall_seconds: self.started.elapsed().as_secs_f64(),
            population_history: self.population,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub best_x: Vec<f64>,
    pub best_f: f64,
    pub trace: Trace,
    pub evals_used: usize,
    /// Stopped by the wall-clock cap before the budget was spent.
    pub truncated: bool,
    pub wall_seconds: f64,
    /// `(evaluations used, population size)` after each generation, for
    /// methods with a varying population.
    pub population_history: Vec<(usize, usize)>,
}
