use std::collections::BTreeMap;

use rand::Rng as _;
use rand_distr::{Cauchy, Distribution, Normal};

use super::util::{argsort, linear_population_size, pick_excluding, reflect, uniform_point};
use super::{Hyperparameters, ObjectiveHandle, Optimizer, OptimizerError, Stop};
use crate::seeding::Rng;

/// Success-history adaptive DE (current-to-pbest/1/bin with an external
/// archive) with linear population size reduction.
#[derive(Debug, Clone, PartialEq)]
pub struct Lshade {
    /// Initial population per dimension.
    pub init_rate: f64,
    pub min_population: usize,
    pub memory_size: usize,
    /// Fraction of the population eligible as pbest.
    pub pbest_rate: f64,
    /// Archive capacity relative to the population.
    pub archive_rate: f64,
}

impl Default for Lshade {
    fn default() -> Self {
        Self {
            init_rate: 18.0,
            min_population: 4,
            memory_size: 6,
            pbest_rate: 0.11,
            archive_rate: 2.6,
        }
    }
}

impl Lshade {
    pub fn from_hyperparameters(map: &BTreeMap<String, f64>) -> Result<Self, OptimizerError> {
        let d = Self::default();
        let mut h = Hyperparameters::new("lshade", map);
        let s = Self {
            init_rate: h.real("init_rate", d.init_rate, 0.1, 1000.0)?,
            min_population: h.count("min_population", d.min_population, 4)?,
            memory_size: h.count("memory_size", d.memory_size, 1)?,
            pbest_rate: h.real("p", d.pbest_rate, 0.0, 1.0)?,
            archive_rate: h.real("archive_rate", d.archive_rate, 0.0, 100.0)?,
        };
        h.finish()?;
        Ok(s)
    }

    pub fn initial_population(&self, dim: usize) -> usize {
        ((self.init_rate * dim as f64).round() as usize).max(self.min_population)
    }
}

/// Success-history memory of the scale factor and crossover rate.
pub(crate) struct Memory {
    f: Vec<f64>,
    // None: the terminal value, forcing CR = 0
    cr: Vec<Option<f64>>,
    next: usize,
}

impl Memory {
    pub(crate) fn new(size: usize) -> Self {
        Self {
            f: vec![0.5; size],
            cr: vec![Some(0.5); size],
            next: 0,
        }
    }

    pub(crate) fn sample(&self, rng: &mut Rng) -> (f64, f64) {
        let k = rng.random_range(0..self.f.len());
        let cr = match self.cr[k] {
            None => 0.0,
            Some(m) => Normal::new(m, 0.1).expect("finite").sample(rng).clamp(0.0, 1.0),
        };
        let cauchy = Cauchy::new(self.f[k], 0.1).expect("finite");
        let f = loop {
            let f = cauchy.sample(rng);
            if f > 0.0 {
                break f.min(1.0);
            }
        };
        (f, cr)
    }

    /// Weighted Lehmer means of the successful values, weighted by
    /// fitness improvement.
    pub(crate) fn update(&mut self, s_f: &[f64], s_cr: &[f64], gains: &[f64]) {
        if s_f.is_empty() {
            return;
        }
        let total: f64 = gains.iter().sum();
        let w: Vec<f64> = if total > 0.0 && total.is_finite() {
            gains.iter().map(|g| g / total).collect()
        } else {
            vec![1.0 / gains.len() as f64; gains.len()]
        };
        let lehmer = |v: &[f64]| {
            let num: f64 = w.iter().zip(v).map(|(w, x)| w * x * x).sum();
            let den: f64 = w.iter().zip(v).map(|(w, x)| w * x).sum();
            if den > 0.0 {
                Some(num / den)
            } else {
                None
            }
        };
        self.f[self.next] = lehmer(s_f).unwrap_or(self.f[self.next]);
        self.cr[self.next] = match self.cr[self.next] {
            None => None,
            Some(_) if s_cr.iter().all(|&c| c == 0.0) => None,
            Some(_) => lehmer(s_cr),
        };
        self.next = (self.next + 1) % self.f.len();
    }
}

struct Generation {
    trials: Vec<Vec<f64>>,
    params: Vec<(f64, f64)>,
    values: Vec<f64>,
}

impl Optimizer for Lshade {
    fn name(&self) -> &str {
        "lshade"
    }

    fn min_budget(&self, dim: usize) -> usize {
        self.initial_population(dim)
    }

    fn run(&self, handle: &mut ObjectiveHandle<'_, '_>, rng: &mut Rng) -> Result<(), Stop> {
        let n = handle.dim();
        let bounds = handle.bounds().to_vec();
        let max_evals = handle.budget();
        let n_init = self.initial_population(n);
        let mut pop: Vec<Vec<f64>> = (0..n_init).map(|_| uniform_point(&bounds, rng)).collect();
        let mut fit = Vec::with_capacity(n_init);
        for x in &pop {
            fit.push(handle.evaluate(x)?);
        }
        handle.record_population(pop.len());
        let mut archive: Vec<Vec<f64>> = Vec::new();
        let mut memory = Memory::new(self.memory_size);

        loop {
            let stop = handle.check_time().err();
            let np = pop.len();
            let mut gen = Generation {
                trials: Vec::with_capacity(np),
                params: Vec::with_capacity(np),
                values: Vec::with_capacity(np),
            };
            let mut outcome = stop.map_or(Ok(()), Err);
            if outcome.is_ok() {
                let order = argsort(&fit);
                let top = ((self.pbest_rate * np as f64).round() as usize).clamp(2, np);
                for i in 0..np {
                    let (f, cr) = memory.sample(rng);
                    let pb = order[rng.random_range(0..top)];
                    let r1 = pick_excluding(np, &[i], rng);
                    let r2 = pick_excluding(np + archive.len(), &[i, r1], rng);
                    let x2 = if r2 < np { &pop[r2] } else { &archive[r2 - np] };
                    let jrand = rng.random_range(0..n);
                    let trial: Vec<f64> = (0..n)
                        .map(|j| {
                            if j == jrand || rng.random::<f64>() < cr {
                                let v = pop[i][j] + f * (pop[pb][j] - pop[i][j]) + f * (pop[r1][j] - x2[j]);
                                reflect(v, bounds[j].0, bounds[j].1)
                            } else {
                                pop[i][j]
                            }
                        })
                        .collect();
                    match handle.evaluate(&trial) {
                        Ok(v) => {
                            gen.trials.push(trial);
                            gen.params.push((f, cr));
                            gen.values.push(v);
                        }
                        Err(e) => {
                            outcome = Err(e);
                            break;
                        }
                    }
                }
            }

            // selection over whatever part of the generation was evaluated
            let (mut s_f, mut s_cr, mut gains) = (Vec::new(), Vec::new(), Vec::new());
            for (i, trial) in gen.trials.into_iter().enumerate() {
                let v = gen.values[i];
                if v < fit[i] {
                    s_f.push(gen.params[i].0);
                    s_cr.push(gen.params[i].1);
                    gains.push(fit[i] - v);
                    archive.push(std::mem::replace(&mut pop[i], trial));
                    fit[i] = v;
                }
            }
            memory.update(&s_f, &s_cr, &gains);

            let target = linear_population_size(n_init, self.min_population, handle.evals(), max_evals)
                .max(self.min_population);
            if target < pop.len() {
                let order = argsort(&fit);
                let keep: Vec<usize> = {
                    let mut k = order[..target].to_vec();
                    k.sort_unstable();
                    k
                };
                pop = keep.iter().map(|&i| pop[i].clone()).collect();
                fit = keep.iter().map(|&i| fit[i]).collect();
            }
            let cap = (self.archive_rate * pop.len() as f64).round() as usize;
            while archive.len() > cap {
                let k = rng.random_range(0..archive.len());
                archive.swap_remove(k);
            }
            handle.record_population(pop.len());
            outcome?;
        }
    }
}
