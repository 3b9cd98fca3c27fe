use std::collections::BTreeMap;

use rand::Rng as _;

use super::util::{uniform_point, wrap};
use super::{Hyperparameters, ObjectiveHandle, Optimizer, OptimizerError, Stop};
use crate::seeding::Rng;

#[derive(Debug, Clone, PartialEq)]
struct SwarmParams {
    swarm: usize,
    inertia: f64,
    damping: f64,
    cognitive: f64,
    social: f64,
    /// Velocity limit as a fraction of each coordinate's range.
    max_velocity: f64,
    /// Wrap periodic coordinates instead of clamping them.
    wrap_periodic: bool,
}

impl SwarmParams {
    fn read(name: &str, d: Self, map: &BTreeMap<String, f64>) -> Result<Self, OptimizerError> {
        let mut h = Hyperparameters::new(name, map);
        let s = Self {
            swarm: h.count("swarm", d.swarm, 2)?,
            inertia: h.real("w", d.inertia, 0.0, 2.0)?,
            damping: h.real("w_damp", d.damping, 0.0, 1.0)?,
            cognitive: h.real("c1", d.cognitive, 0.0, 5.0)?,
            social: h.real("c2", d.social, 0.0, 5.0)?,
            max_velocity: h.real("max_velocity", d.max_velocity, 0.0, 1.0)?,
            wrap_periodic: d.wrap_periodic,
        };
        h.finish()?;
        Ok(s)
    }

    /// Global-best swarm; the global best is updated after every evaluation.
    fn run(&self, handle: &mut ObjectiveHandle<'_, '_>, rng: &mut Rng) -> Result<(), Stop> {
        let n = handle.dim();
        let bounds = handle.bounds().to_vec();
        let periodic: Vec<bool> = handle.periodic().iter().map(|&p| p && self.wrap_periodic).collect();
        let vmax: Vec<f64> = bounds.iter().map(|&(lo, hi)| self.max_velocity * (hi - lo)).collect();

        let mut pos: Vec<Vec<f64>> = (0..self.swarm).map(|_| uniform_point(&bounds, rng)).collect();
        let mut vel = vec![vec![0.0; n]; self.swarm];
        let mut pbest = pos.clone();
        let mut pbest_f = Vec::with_capacity(self.swarm);
        let mut g = 0;
        for (i, x) in pos.iter().enumerate() {
            let f = handle.evaluate(x)?;
            pbest_f.push(f);
            if f < pbest_f[g] {
                g = i;
            }
        }
        let mut gbest = pbest[g].clone();
        let mut gbest_f = pbest_f[g];
        let mut w = self.inertia;
        loop {
            handle.check_time()?;
            for i in 0..self.swarm {
                for j in 0..n {
                    let (lo, hi) = bounds[j];
                    let v = w * vel[i][j]
                        + self.cognitive * rng.random::<f64>() * (pbest[i][j] - pos[i][j])
                        + self.social * rng.random::<f64>() * (gbest[j] - pos[i][j]);
                    let v = v.clamp(-vmax[j], vmax[j]);
                    let x = pos[i][j] + v;
                    if periodic[j] {
                        vel[i][j] = v;
                        pos[i][j] = wrap(x, lo, hi);
                    } else if x < lo || x > hi {
                        vel[i][j] = 0.0;
                        pos[i][j] = x.clamp(lo, hi);
                    } else {
                        vel[i][j] = v;
                        pos[i][j] = x;
                    }
                }
                let f = handle.evaluate(&pos[i])?;
                if f < pbest_f[i] {
                    pbest_f[i] = f;
                    pbest[i].copy_from_slice(&pos[i]);
                    if f < gbest_f {
                        gbest_f = f;
                        gbest.copy_from_slice(&pos[i]);
                    }
                }
            }
            w *= self.damping;
        }
    }
}

/// Global-best particle swarm with damped inertia and velocity clamping;
/// leaving the box clamps the coordinate and zeroes its velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSwarm(SwarmParams);

impl Default for ParticleSwarm {
    fn default() -> Self {
        Self(SwarmParams {
            swarm: 50,
            inertia: 1.0,
            damping: 0.99,
            cognitive: 1.5,
            social: 2.0,
            max_velocity: 0.1,
            wrap_periodic: false,
        })
    }
}

impl ParticleSwarm {
    pub fn from_hyperparameters(map: &BTreeMap<String, f64>) -> Result<Self, OptimizerError> {
        SwarmParams::read("pso", Self::default().0, map).map(Self)
    }
}

impl Optimizer for ParticleSwarm {
    fn name(&self) -> &str {
        "pso"
    }

    fn min_budget(&self, _dim: usize) -> usize {
        self.0.swarm
    }

    fn run(&self, handle: &mut ObjectiveHandle<'_, '_>, rng: &mut Rng) -> Result<(), Stop> {
        self.0.run(handle, rng)
    }
}

/// The swarm flown directly in the `(r, psi, phi)` path coordinates: per
/// coordinate velocity limits from the search bounds and azimuths that wrap
/// around instead of sticking to the bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalSwarm(SwarmParams);

impl Default for SphericalSwarm {
    fn default() -> Self {
        Self(SwarmParams {
            swarm: 50,
            inertia: 1.0,
            damping: 0.98,
            cognitive: 1.5,
            social: 1.5,
            max_velocity: 0.5,
            wrap_periodic: true,
        })
    }
}

impl SphericalSwarm {
    pub fn from_hyperparameters(map: &BTreeMap<String, f64>) -> Result<Self, OptimizerError> {
        SwarmParams::read("spso-core", Self::default().0, map).map(Self)
    }
}

impl Optimizer for SphericalSwarm {
    fn name(&self) -> &str {
        "spso-core"
    }

    fn min_budget(&self, _dim: usize) -> usize {
        self.0.swarm
    }

    fn run(&self, handle: &mut ObjectiveHandle<'_, '_>, rng: &mut Rng) -> Result<(), Stop> {
        self.0.run(handle, rng)
    }
}
