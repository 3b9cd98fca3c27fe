use std::collections::BTreeMap;

use rand::Rng as _;

use super::util::{argsort, linear_population_size, pick_excluding, reflect, uniform_point};
use super::{Hyperparameters, ObjectiveHandle, Optimizer, OptimizerError, Stop};
use crate::seeding::Rng;

/// (knowledge factor, knowledge ratio) settings the run adapts between.
const SETTINGS: [(f64, f64); 4] = [(0.1, 0.2), (1.0, 0.1), (0.5, 0.9), (1.0, 0.9)];

/// Adaptive gaining-sharing knowledge search: each individual learns from
/// its rank neighbours (junior phase) and from the best/middle/worst strata
/// (senior phase), with the junior share shrinking over the run. The
/// factor/ratio pair is drawn from a small pool whose probabilities follow
/// recent improvement, and the population shrinks linearly.
#[derive(Debug, Clone, PartialEq)]
pub struct Agsk {
    pub init_rate: f64,
    pub min_population: usize,
    /// Size of the best and worst strata in the senior phase.
    pub stratum: f64,
    /// Fraction of the budget spent with uniform setting probabilities.
    pub learning_period: f64,
    pub min_probability: f64,
}

impl Default for Agsk {
    fn default() -> Self {
        Self {
            init_rate: 20.0,
            min_population: 12,
            stratum: 0.1,
            learning_period: 0.1,
            min_probability: 0.05,
        }
    }
}

impl Agsk {
    pub fn from_hyperparameters(map: &BTreeMap<String, f64>) -> Result<Self, OptimizerError> {
        let d = Self::default();
        let mut h = Hyperparameters::new("agsk", map);
        let s = Self {
            init_rate: h.real("init_rate", d.init_rate, 0.1, 1000.0)?,
            min_population: h.count("min_population", d.min_population, 6)?,
            stratum: h.real("p", d.stratum, 0.01, 0.33)?,
            learning_period: h.real("learning_period", d.learning_period, 0.0, 1.0)?,
            min_probability: h.real("min_probability", d.min_probability, 0.0, 0.25)?,
        };
        h.finish()?;
        Ok(s)
    }

    pub fn initial_population(&self, dim: usize) -> usize {
        ((self.init_rate * dim as f64).round() as usize).max(self.min_population)
    }
}

fn pick(settings_prob: &[f64; 4], rng: &mut Rng) -> usize {
    let u = rng.random::<f64>();
    let mut acc = 0.0;
    for (k, p) in settings_prob.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    SETTINGS.len() - 1
}

impl Optimizer for Agsk {
    fn name(&self) -> &str {
        "agsk"
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
        // knowledge rate: half the individuals in (0, 1), half in 1..=20
        let mut rate: Vec<f64> = (0..n_init)
            .map(|i| {
                if i < n_init / 2 {
                    rng.random::<f64>()
                } else {
                    (20.0 * rng.random::<f64>()).ceil().max(1.0)
                }
            })
            .collect();
        let mut fit = Vec::with_capacity(n_init);
        for x in &pop {
            fit.push(handle.evaluate(x)?);
        }
        handle.record_population(pop.len());
        let mut probs = [0.25; 4];

        loop {
            handle.check_time()?;
            let np = pop.len();
            let progress = handle.evals() as f64 / max_evals as f64;
            let order = argsort(&fit);
            let mut rank = vec![0; np];
            for (r, &i) in order.iter().enumerate() {
                rank[i] = r;
            }
            let edge = ((self.stratum * np as f64).round() as usize).max(1);
            let mut gain = [0.0; 4];
            let mut used = [0usize; 4];
            let mut next = pop.clone();
            let mut next_fit = fit.clone();
            let mut outcome = Ok(());
            for i in 0..np {
                let setting = pick(&probs, rng);
                let (kf, kr) = SETTINGS[setting];
                let junior_share = (1.0 - progress).powf(rate[i]);

                let r = rank[i];
                let (better, worse) = if r == 0 {
                    (order[1], order[2])
                } else if r == np - 1 {
                    (order[np - 3], order[np - 2])
                } else {
                    (order[r - 1], order[r + 1])
                };
                let rand_j = pick_excluding(np, &[i, better, worse], rng);
                let top = order[rng.random_range(0..edge)];
                let mid = order[rng.random_range(edge..np - edge)];
                let bottom = order[rng.random_range(np - edge..np)];

                let trial: Vec<f64> = (0..n)
                    .map(|j| {
                        let junior = rng.random::<f64>() < junior_share;
                        if rng.random::<f64>() > kr {
                            return pop[i][j];
                        }
                        let v = if junior {
                            let pull = if fit[i] > fit[rand_j] {
                                pop[rand_j][j] - pop[i][j]
                            } else {
                                pop[i][j] - pop[rand_j][j]
                            };
                            pop[i][j] + kf * (pop[better][j] - pop[worse][j] + pull)
                        } else {
                            let pull = if fit[i] > fit[mid] {
                                pop[mid][j] - pop[i][j]
                            } else {
                                pop[i][j] - pop[mid][j]
                            };
                            pop[i][j] + kf * (pop[top][j] - pop[bottom][j] + pull)
                        };
                        reflect(v, bounds[j].0, bounds[j].1)
                    })
                    .collect();
                let v = match handle.evaluate(&trial) {
                    Ok(v) => v,
                    Err(e) => {
                        outcome = Err(e);
                        break;
                    }
                };
                used[setting] += 1;
                if v < fit[i] {
                    gain[setting] += (fit[i] - v) / fit[i].abs().max(f64::MIN_POSITIVE);
                    next[i] = trial;
                    next_fit[i] = v;
                }
            }
            pop = next;
            fit = next_fit;

            if handle.evals() as f64 >= self.learning_period * max_evals as f64 {
                let mean: Vec<f64> = (0..4)
                    .map(|k| if used[k] > 0 { gain[k] / used[k] as f64 } else { 0.0 })
                    .collect();
                let total: f64 = mean.iter().sum();
                if total > 0.0 && total.is_finite() {
                    for k in 0..4 {
                        probs[k] = (mean[k] / total).max(self.min_probability);
                    }
                    let s: f64 = probs.iter().sum();
                    probs.iter_mut().for_each(|p| *p /= s);
                }
            }

            let target = linear_population_size(n_init, self.min_population, handle.evals(), max_evals)
                .max(self.min_population);
            if target < pop.len() {
                let mut keep = argsort(&fit)[..target].to_vec();
                keep.sort_unstable();
                pop = keep.iter().map(|&i| pop[i].clone()).collect();
                fit = keep.iter().map(|&i| fit[i]).collect();
                rate = keep.iter().map(|&i| rate[i]).collect();
            }
            handle.record_population(pop.len());
            outcome?;
        }
    }
}
