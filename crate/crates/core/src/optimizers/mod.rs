//! Black-box optimizers behind a common interface.
//!
//! Every method sees the problem only through an [`ObjectiveHandle`], which
//! counts evaluations, rejects calls past the budget and keeps the incumbent
//! and its [`Trace`]. Methods are looked up by name in a [`Registry`]; new
//! ones can be added with [`Registry::register`].

mod agsk;
mod de;
mod direct;
mod handle;
mod lshade;
mod nelder_mead;
mod pso;
mod util;

use std::collections::{BTreeMap, BTreeSet};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::seeding::{rng_from_seed, Rng};

pub use agsk::Agsk;
pub use de::DifferentialEvolution;
pub use direct::Direct;
pub use handle::{ObjectiveHandle, OptimizationResult, Problem, Stop, Trace};
pub use lshade::Lshade;
pub use nelder_mead::NelderMeadRestart;
pub use pso::{ParticleSwarm, SphericalSwarm};
pub use util::linear_population_size;

#[derive(Debug, thiserror::Error)]
pub enum OptimizerError {
    #[error("unknown optimizer `{0}`")]
    UnknownOptimizer(String),
    #[error("optimizer `{optimizer}`: unknown hyperparameter `{key}`")]
    UnknownHyperparameter { optimizer: String, key: String },
    #[error("optimizer `{optimizer}`: hyperparameter `{key}` = {value}: {reason}")]
    InvalidHyperparameter {
        optimizer: String,
        key: String,
        value: f64,
        reason: &'static str,
    },
    #[error("optimizer `{optimizer}` needs a budget of at least {minimum} evaluations in dimension {dim}, got {budget}")]
    BudgetTooSmall {
        optimizer: String,
        dim: usize,
        budget: usize,
        minimum: usize,
    },
    #[error("problem has no dimensions or an empty/inverted bound")]
    InvalidProblem,
}

/// How the initial population/point is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitPolicy {
    #[default]
    Uniform,
}

/// An optimizer as named in an experiment plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSpec {
    pub name: String,
    /// Display name in records; defaults to `name`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default)]
    pub hyperparameters: BTreeMap<String, f64>,
    #[serde(default)]
    pub init: InitPolicy,
}

impl OptimizerSpec {
    pub fn named(name: &str) -> Self {
        Self {
            name: name.to_string(),
            label: None,
            hyperparameters: BTreeMap::new(),
            init: InitPolicy::Uniform,
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.hyperparameters.insert(key.to_string(), value);
        self
    }

    pub fn display_name(&self) -> &str {
        self.label.as_deref().unwrap_or(&self.name)
    }
}

/// Reads hyperparameters with defaults and rejects keys nobody asked for.
pub struct Hyperparameters<'a> {
    optimizer: &'a str,
    map: &'a BTreeMap<String, f64>,
    used: BTreeSet<&'a str>,
}

impl<'a> Hyperparameters<'a> {
    pub fn new(optimizer: &'a str, map: &'a BTreeMap<String, f64>) -> Self {
        Self {
            optimizer,
            map,
            used: BTreeSet::new(),
        }
    }

    fn invalid(&self, key: &str, value: f64, reason: &'static str) -> OptimizerError {
        OptimizerError::InvalidHyperparameter {
            optimizer: self.optimizer.to_string(),
            key: key.to_string(),
            value,
            reason,
        }
    }

    /// Real value in `[lo, hi]`.
    pub fn real(&mut self, key: &'a str, default: f64, lo: f64, hi: f64) -> Result<f64, OptimizerError> {
        self.used.insert(key);
        let v = self.map.get(key).copied().unwrap_or(default);
        if !(v >= lo && v <= hi) {
            return Err(self.invalid(key, v, "out of range"));
        }
        Ok(v)
    }

    /// Non-negative integer of at least `min`.
    pub fn count(&mut self, key: &'a str, default: usize, min: usize) -> Result<usize, OptimizerError> {
        self.used.insert(key);
        match self.map.get(key) {
            None => Ok(default),
            Some(&v) if v.fract() == 0.0 && v >= min as f64 && v <= u32::MAX as f64 => Ok(v as usize),
            Some(&v) => Err(self.invalid(key, v, "expected an integer at or above the minimum")),
        }
    }

    pub fn finish(self) -> Result<(), OptimizerError> {
        match self.map.keys().find(|k| !self.used.contains(k.as_str())) {
            Some(k) => Err(OptimizerError::UnknownHyperparameter {
                optimizer: self.optimizer.to_string(),
                key: k.clone(),
            }),
            None => Ok(()),
        }
    }
}

/// A black-box minimizer.
pub trait Optimizer: Send + Sync {
    fn name(&self) -> &str;

    /// Smallest budget the method can run with in dimension `dim`.
    fn min_budget(&self, dim: usize) -> usize;

    /// Runs until the handle refuses further evaluations (or the method
    /// terminates on its own). The incumbent lives in the handle.
    fn run(&self, handle: &mut ObjectiveHandle<'_, '_>, rng: &mut Rng) -> Result<(), Stop>;
}

pub type Factory = fn(&BTreeMap<String, f64>) -> Result<Box<dyn Optimizer>, OptimizerError>;

/// Name → constructor table.
#[derive(Clone)]
pub struct Registry {
    entries: BTreeMap<String, Factory>,
}

impl Default for Registry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register("nm", |h| Ok(Box::new(NelderMeadRestart::from_hyperparameters(h)?)));
        r.register("direct", |h| Ok(Box::new(Direct::from_hyperparameters(h)?)));
        r.register("de", |h| Ok(Box::new(DifferentialEvolution::from_hyperparameters(h)?)));
        r.register("pso", |h| Ok(Box::new(ParticleSwarm::from_hyperparameters(h)?)));
        r.register("spso-core", |h| Ok(Box::new(SphericalSwarm::from_hyperparameters(h)?)));
        r.register("lshade", |h| Ok(Box::new(Lshade::from_hyperparameters(h)?)));
        r.register("agsk", |h| Ok(Box::new(Agsk::from_hyperparameters(h)?)));
        r
    }
}

impl Registry {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    /// Names are matched case-insensitively.
    pub fn register(&mut self, name: &str, factory: Factory) {
        self.entries.insert(name.to_ascii_lowercase(), factory);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn build(&self, spec: &OptimizerSpec) -> Result<Box<dyn Optimizer>, OptimizerError> {
        let key = spec.name.to_ascii_lowercase();
        let key = if key == "spso" { "spso-core".to_string() } else { key };
        let factory = self
            .entries
            .get(&key)
            .ok_or_else(|| OptimizerError::UnknownOptimizer(spec.name.clone()))?;
        factory(&spec.hyperparameters)
    }
}

/// The seven methods of the default roster, in a fixed order.
pub fn default_roster() -> Vec<OptimizerSpec> {
    ["nm", "direct", "de", "pso", "spso-core", "lshade", "agsk"]
        .into_iter()
        .map(OptimizerSpec::named)
        .collect()
}

/// Runs `optimizer` on `problem` with at most `budget` evaluations.
pub fn run_optimizer(
    optimizer: &dyn Optimizer,
    problem: &Problem<'_>,
    budget: usize,
    wall_cap: Option<Duration>,
    seed: u64,
) -> Result<OptimizationResult, OptimizerError> {
    let dim = problem.dim();
    if dim == 0 || problem.bounds.iter().any(|&(lo, hi)| !(lo <= hi) || !lo.is_finite() || !hi.is_finite()) {
        return Err(OptimizerError::InvalidProblem);
    }
    let minimum = optimizer.min_budget(dim);
    if budget < minimum {
        return Err(OptimizerError::BudgetTooSmall {
            optimizer: optimizer.name().to_string(),
            dim,
            budget,
            minimum,
        });
    }
    let mut handle = ObjectiveHandle::new(problem, budget, wall_cap);
    let mut rng = rng_from_seed(seed);
    // stopping early is the normal way out
    let _ = optimizer.run(&mut handle, &mut rng);
    Ok(handle.finish())
}

/// Builds the optimizer named in `spec` from the default registry and runs it.
pub fn optimize(
    spec: &OptimizerSpec,
    problem: &Problem<'_>,
    budget: usize,
    wall_cap: Option<Duration>,
    seed: u64,
) -> Result<OptimizationResult, OptimizerError> {
    let optimizer = Registry::default().build(spec)?;
    run_optimizer(optimizer.as_ref(), problem, budget, wall_cap, seed)
}

/// Standard test functions.
pub mod functions {
    pub fn sphere(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    pub fn rastrigin(x: &[f64]) -> f64 {
        let tau = std::f64::consts::TAU;
        10.0 * x.len() as f64 + x.iter().map(|v| v * v - 10.0 * (tau * v).cos()).sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere_problem(f: &(dyn Fn(&[f64]) -> f64 + Sync), dim: usize) -> Problem<'_> {
        Problem::new(vec![(-1.0, 1.0); dim], f)
    }

    #[test]
    fn unknown_names_and_keys_are_rejected() {
        let reg = Registry::default();
        assert!(matches!(
            reg.build(&OptimizerSpec::named("cmaes")),
            Err(OptimizerError::UnknownOptimizer(_))
        ));
        assert!(matches!(
            reg.build(&OptimizerSpec::named("de").with("crossover", 0.5)),
            Err(OptimizerError::UnknownHyperparameter { .. })
        ));
        assert!(matches!(
            reg.build(&OptimizerSpec::named("de").with("cr", 1.5)),
            Err(OptimizerError::InvalidHyperparameter { .. })
        ));
        assert!(reg.build(&OptimizerSpec::named("SPSO")).is_ok());
    }

    #[test]
    fn small_budget_is_a_configuration_error() {
        let f = functions::sphere;
        let p = sphere_problem(&f, 5);
        let calls = std::sync::atomic::AtomicUsize::new(0);
        let counted = |x: &[f64]| {
            calls.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
            functions::sphere(x)
        };
        let pc = sphere_problem(&counted, 5);
        let err = optimize(&OptimizerSpec::named("lshade"), &pc, 10, None, 1).unwrap_err();
        assert!(matches!(err, OptimizerError::BudgetTooSmall { minimum: 90, .. }));
        assert_eq!(calls.load(std::sync::atomic::Ordering::Relaxed), 0);
        assert!(optimize(&OptimizerSpec::named("de"), &p, 49, None, 1).is_err());
    }

    #[test]
    fn every_method_respects_the_contract() {
        let f = functions::rastrigin;
        let p = sphere_problem(&f, 6);
        for spec in default_roster() {
            for budget in [500, 1237] {
                let r = optimize(&spec, &p, budget, None, 7).unwrap();
                assert_eq!(r.evals_used, budget, "{}", spec.name);
                assert!(r.trace.is_monotone(), "{}", spec.name);
                assert_eq!(r.trace.milestones.last().unwrap().0, budget);
                let min = r.trace.milestones.iter().map(|m| m.1).fold(f64::INFINITY, f64::min);
                assert_eq!(r.best_f, min);
                assert_eq!(functions::rastrigin(&r.best_x), r.best_f);
                let again = optimize(&spec, &p, budget, None, 7).unwrap();
                assert_eq!(again.trace, r.trace, "{}", spec.name);
                assert_eq!(again.best_x, r.best_x);
            }
        }
    }

    #[test]
    fn seed_only_matters_for_stochastic_methods() {
        let f = functions::rastrigin;
        let p = sphere_problem(&f, 4);
        let a = optimize(&OptimizerSpec::named("direct"), &p, 800, None, 1).unwrap();
        let b = optimize(&OptimizerSpec::named("direct"), &p, 800, None, 2).unwrap();
        assert_eq!(a.trace, b.trace);
        let a = optimize(&OptimizerSpec::named("de"), &p, 800, None, 1).unwrap();
        let b = optimize(&OptimizerSpec::named("de"), &p, 800, None, 2).unwrap();
        assert_ne!(a.trace, b.trace);
    }

    #[test]
    fn periodic_coordinates_stay_in_bounds_for_spso() {
        let f = |x: &[f64]| (x[0] - 3.0).powi(2) + x[1].powi(2);
        let pi = std::f64::consts::PI;
        let p = Problem::new(vec![(-pi, pi), (-1.0, 1.0)], &f).with_periodic(vec![true, false]);
        let r = optimize(&OptimizerSpec::named("spso-core"), &p, 3000, None, 3).unwrap();
        assert!(r.best_f < 1e-2, "{}", r.best_f);
    }
}
