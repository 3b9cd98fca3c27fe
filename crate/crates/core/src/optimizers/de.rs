use std::collections::BTreeMap;

use rand::Rng as _;

use super::util::{pick_excluding, reflect, uniform_point};
use super::{Hyperparameters, ObjectiveHandle, Optimizer, OptimizerError, Stop};
use crate::seeding::Rng;

/// Classic DE/rand/1/bin with generational replacement.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferentialEvolution {
    pub population: usize,
    pub scale: f64,
    pub crossover: f64,
}

impl Default for DifferentialEvolution {
    fn default() -> Self {
        Self {
            population: 50,
            scale: 0.5,
            crossover: 0.9,
        }
    }
}

impl DifferentialEvolution {
    pub fn from_hyperparameters(map: &BTreeMap<String, f64>) -> Result<Self, OptimizerError> {
        let d = Self::default();
        let mut h = Hyperparameters::new("de", map);
        let s = Self {
            population: h.count("population", d.population, 4)?,
            scale: h.real("f", d.scale, 0.0, 2.0)?,
            crossover: h.real("cr", d.crossover, 0.0, 1.0)?,
        };
        h.finish()?;
        Ok(s)
    }
}

impl Optimizer for DifferentialEvolution {
    fn name(&self) -> &str {
        "de"
    }

    fn min_budget(&self, _dim: usize) -> usize {
        self.population
    }

    fn run(&self, handle: &mut ObjectiveHandle<'_, '_>, rng: &mut Rng) -> Result<(), Stop> {
        let n = handle.dim();
        let bounds = handle.bounds().to_vec();
        let np = self.population;
        let mut pop: Vec<Vec<f64>> = (0..np).map(|_| uniform_point(&bounds, rng)).collect();
        let mut fit = Vec::with_capacity(np);
        for x in &pop {
            fit.push(handle.evaluate(x)?);
        }
        let mut trial = vec![0.0; n];
        loop {
            handle.check_time()?;
            let mut next = pop.clone();
            let mut next_fit = fit.clone();
            for i in 0..np {
                let r1 = pick_excluding(np, &[i], rng);
                let r2 = pick_excluding(np, &[i, r1], rng);
                let r3 = pick_excluding(np, &[i, r1, r2], rng);
                let jrand = rng.random_range(0..n);
                for j in 0..n {
                    trial[j] = if j == jrand || rng.random::<f64>() < self.crossover {
                        let v = pop[r1][j] + self.scale * (pop[r2][j] - pop[r3][j]);
                        reflect(v, bounds[j].0, bounds[j].1)
                    } else {
                        pop[i][j]
                    };
                }
                let f = handle.evaluate(&trial)?;
                if f < fit[i] {
                    next[i].copy_from_slice(&trial);
                    next_fit[i] = f;
                }
            }
            pop = next;
            fit = next_fit;
        }
    }
}
