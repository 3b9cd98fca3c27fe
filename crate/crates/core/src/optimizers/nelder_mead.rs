use std::collections::BTreeMap;

use super::util::uniform_point;
use super::{Hyperparameters, ObjectiveHandle, Optimizer, OptimizerError, Stop};
use crate::seeding::Rng;

/// Nelder-Mead simplex search restarted from a fresh uniform point whenever
/// the simplex collapses. Works in coordinates scaled to the unit box and
/// clamps every trial point into it.
#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadRestart {
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
    /// Edge length of the initial simplex, as a fraction of each range.
    pub initial_step: f64,
    /// Restart once the simplex diameter falls below this fraction of the range.
    pub collapse_tolerance: f64,
}

impl Default for NelderMeadRestart {
    fn default() -> Self {
        Self {
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
            initial_step: 0.1,
            collapse_tolerance: 1e-8,
        }
    }
}

impl NelderMeadRestart {
    pub fn from_hyperparameters(map: &BTreeMap<String, f64>) -> Result<Self, OptimizerError> {
        let d = Self::default();
        let mut h = Hyperparameters::new("nm", map);
        let s = Self {
            reflection: h.real("reflection", d.reflection, 1e-6, 10.0)?,
            expansion: h.real("expansion", d.expansion, 1.0, 10.0)?,
            contraction: h.real("contraction", d.contraction, 1e-6, 1.0 - 1e-6)?,
            shrink: h.real("shrink", d.shrink, 1e-6, 1.0 - 1e-6)?,
            initial_step: h.real("initial_step", d.initial_step, 1e-9, 0.5)?,
            collapse_tolerance: h.real("collapse_tolerance", d.collapse_tolerance, 0.0, 1.0)?,
        };
        h.finish()?;
        Ok(s)
    }
}

struct Scaled<'h, 'p, 'f> {
    handle: &'h mut ObjectiveHandle<'p, 'f>,
    x: Vec<f64>,
}

impl Scaled<'_, '_, '_> {
    fn eval(&mut self, u: &[f64]) -> Result<f64, Stop> {
        for ((xi, &ui), &(lo, hi)) in self.x.iter_mut().zip(u).zip(self.handle.bounds()) {
            *xi = (lo + ui * (hi - lo)).clamp(lo, hi);
        }
        let x = std::mem::take(&mut self.x);
        let f = self.handle.evaluate(&x);
        self.x = x;
        f
    }
}

fn combine(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    // a + t (b - a), clamped to the unit box
    a.iter().zip(b).map(|(&ai, &bi)| (ai + t * (bi - ai)).clamp(0.0, 1.0)).collect()
}

impl Optimizer for NelderMeadRestart {
    fn name(&self) -> &str {
        "nm"
    }

    fn min_budget(&self, _dim: usize) -> usize {
        1
    }

    fn run(&self, handle: &mut ObjectiveHandle<'_, '_>, rng: &mut Rng) -> Result<(), Stop> {
        let n = handle.dim();
        let unit = vec![(0.0, 1.0); n];
        let mut s = Scaled { handle, x: vec![0.0; n] };
        loop {
            s.handle.check_time()?;
            let x0 = uniform_point(&unit, rng);
            let mut simplex = vec![x0.clone()];
            for i in 0..n {
                let mut v = x0.clone();
                v[i] = if v[i] + self.initial_step <= 1.0 {
                    v[i] + self.initial_step
                } else {
                    v[i] - self.initial_step
                };
                simplex.push(v);
            }
            let mut fs = Vec::with_capacity(n + 1);
            for v in &simplex {
                fs.push(s.eval(v)?);
            }
            self.descend(&mut s, &mut simplex, &mut fs)?;
        }
    }
}

impl NelderMeadRestart {
    /// Iterates until the simplex collapses.
    fn descend(&self, s: &mut Scaled<'_, '_, '_>, simplex: &mut Vec<Vec<f64>>, fs: &mut Vec<f64>) -> Result<(), Stop> {
        let n = simplex.len() - 1;
        loop {
            s.handle.check_time()?;
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| fs[a].total_cmp(&fs[b]));
            *simplex = order.iter().map(|&i| simplex[i].clone()).collect();
            *fs = order.iter().map(|&i| fs[i]).collect();

            let diameter = simplex[1..]
                .iter()
                .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            if diameter < self.collapse_tolerance {
                return Ok(());
            }

            let mut centroid = vec![0.0; n];
            for v in &simplex[..n] {
                for (c, x) in centroid.iter_mut().zip(v) {
                    *c += x / n as f64;
                }
            }
            let worst = simplex[n].clone();
            let xr = combine(&centroid, &worst, -self.reflection);
            let fr = s.eval(&xr)?;
            if fr < fs[0] {
                let xe = combine(&centroid, &xr, self.expansion);
                let fe = s.eval(&xe)?;
                if fe < fr {
                    simplex[n] = xe;
                    fs[n] = fe;
                } else {
                    simplex[n] = xr;
                    fs[n] = fr;
                }
                continue;
            }
            if fr < fs[n - 1] {
                simplex[n] = xr;
                fs[n] = fr;
                continue;
            }
            let accepted = if fr < fs[n] {
                let xc = combine(&centroid, &xr, self.contraction);
                let fc = s.eval(&xc)?;
                (fc <= fr).then_some((xc, fc))
            } else {
                let xc = combine(&centroid, &worst, self.contraction);
                let fc = s.eval(&xc)?;
                (fc < fs[n]).then_some((xc, fc))
            };
            match accepted {
                Some((x, f)) => {
                    simplex[n] = x;
                    fs[n] = f;
                }
                None => {
                    let best = simplex[0].clone();
                    for i in 1..=n {
                        simplex[i] = combine(&best, &simplex[i], self.shrink);
                        fs[i] = s.eval(&simplex[i])?;
                    }
                }
            }
        }
    }
}
