use std::collections::{BTreeMap, BTreeSet};

use super::{Hyperparameters, ObjectiveHandle, Optimizer, OptimizerError, Stop};
use crate::seeding::Rng;

/// DIRECT (dividing rectangles) on the unit-scaled box. Deterministic: the
/// random stream is never touched.
#[derive(Debug, Clone, PartialEq)]
pub struct Direct {
    /// Required relative improvement over the incumbent for a rectangle to
    /// be potentially optimal.
    pub epsilon: f64,
}

impl Default for Direct {
    fn default() -> Self {
        Self { epsilon: 1e-4 }
    }
}

impl Direct {
    pub fn from_hyperparameters(map: &BTreeMap<String, f64>) -> Result<Self, OptimizerError> {
        let mut h = Hyperparameters::new("direct", map);
        let s = Self {
            epsilon: h.real("epsilon", 1e-4, 0.0, 1.0)?,
        };
        h.finish()?;
        Ok(s)
    }
}

/// Hyperrectangle: center in unit coordinates and the number of times each
/// side has been trisected.
struct Rect {
    center: Vec<f64>,
    level: Vec<u8>,
    f: f64,
}

impl Rect {
    /// Half-diagonal length.
    fn size(&self) -> f64 {
        let sq: f64 = self.level.iter().map(|&l| 9f64.powi(-(l as i32))).sum();
        0.5 * sq.sqrt()
    }
}

/// Total order on values so they can key a `BTreeSet`.
#[derive(Clone, Copy, PartialEq)]
struct Key(f64, usize);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

struct State<'h, 'p, 'f> {
    handle: &'h mut ObjectiveHandle<'p, 'f>,
    rects: Vec<Rect>,
    // size bits (positive floats order like their bit patterns) -> rects
    groups: BTreeMap<u64, BTreeSet<Key>>,
    x: Vec<f64>,
}

impl State<'_, '_, '_> {
    fn eval(&mut self, u: &[f64]) -> Result<f64, Stop> {
        for ((xi, &ui), &(lo, hi)) in self.x.iter_mut().zip(u).zip(self.handle.bounds()) {
            *xi = (lo + ui * (hi - lo)).clamp(lo, hi);
        }
        let x = std::mem::take(&mut self.x);
        let f = self.handle.evaluate(&x);
        self.x = x;
        // NaN sorts above everything
        f.map(|v| if v.is_nan() { f64::INFINITY } else { v })
    }

    fn insert(&mut self, rect: Rect) {
        let idx = self.rects.len();
        self.groups
            .entry(rect.size().to_bits())
            .or_default()
            .insert(Key(rect.f, idx));
        self.rects.push(rect);
    }

    fn detach(&mut self, idx: usize) {
        let r = &self.rects[idx];
        let bits = r.size().to_bits();
        let set = self.groups.get_mut(&bits).expect("rect is grouped");
        set.remove(&Key(r.f, idx));
        if set.is_empty() {
            self.groups.remove(&bits);
        }
    }

    fn reattach(&mut self, idx: usize) {
        let r = &self.rects[idx];
        self.groups.entry(r.size().to_bits()).or_default().insert(Key(r.f, idx));
    }

    /// Potentially optimal rectangles: the lower-right convex hull of
    /// (size, value) over the best rectangle of each size, filtered by the
    /// epsilon improvement test.
    fn select(&self, epsilon: f64) -> Vec<usize> {
        let best: Vec<(f64, f64, usize)> = self
            .groups
            .iter()
            .map(|(&bits, set)| {
                let k = set.first().expect("groups are non-empty");
                (f64::from_bits(bits), k.0, k.1)
            })
            .collect();
        let f_min = best.iter().map(|b| b.1).fold(f64::INFINITY, f64::min);
        let threshold = f_min - epsilon * f_min.abs();
        let mut chosen = Vec::new();
        for (j, &(dj, fj, idx)) in best.iter().enumerate() {
            let mut k_lo = 0.0f64;
            let mut k_hi = f64::INFINITY;
            for &(di, fi, _) in &best[..j] {
                k_lo = k_lo.max((fj - fi) / (dj - di));
            }
            for &(di, fi, _) in &best[j + 1..] {
                k_hi = k_hi.min((fi - fj) / (di - dj));
            }
            if k_lo > k_hi {
                continue;
            }
            if k_hi.is_infinite() || fj - k_hi * dj <= threshold {
                chosen.push(idx);
            }
        }
        chosen
    }

    fn divide(&mut self, idx: usize) -> Result<(), Stop> {
        self.detach(idx);
        let min_level = *self.rects[idx].level.iter().min().expect("dim > 0");
        let dims: Vec<usize> = (0..self.rects[idx].level.len())
            .filter(|&i| self.rects[idx].level[i] == min_level)
            .collect();
        let delta = 3f64.powi(-(min_level as i32) - 1);
        let center = self.rects[idx].center.clone();
        let mut probes = Vec::with_capacity(dims.len());
        for &i in &dims {
            let mut lo = center.clone();
            lo[i] -= delta;
            let mut hi = center.clone();
            hi[i] += delta;
            let f_lo = match self.eval(&lo) {
                Ok(v) => v,
                Err(e) => {
                    self.reattach(idx);
                    return Err(e);
                }
            };
            let f_hi = match self.eval(&hi) {
                Ok(v) => v,
                Err(e) => {
                    self.reattach(idx);
                    return Err(e);
                }
            };
            probes.push((i, lo, f_lo, hi, f_hi));
        }
        // split first along the dimension with the best probe
        probes.sort_by(|a, b| a.2.min(a.4).total_cmp(&b.2.min(b.4)).then(a.0.cmp(&b.0)));
        let mut level = self.rects[idx].level.clone();
        for (i, lo, f_lo, hi, f_hi) in probes {
            level[i] += 1;
            self.insert(Rect { center: lo, level: level.clone(), f: f_lo });
            self.insert(Rect { center: hi, level: level.clone(), f: f_hi });
        }
        self.rects[idx].level = level;
        self.reattach(idx);
        Ok(())
    }
}

impl Optimizer for Direct {
    fn name(&self) -> &str {
        "direct"
    }

    fn min_budget(&self, _dim: usize) -> usize {
        1
    }

    fn run(&self, handle: &mut ObjectiveHandle<'_, '_>, _rng: &mut Rng) -> Result<(), Stop> {
        let n = handle.dim();
        let mut st = State {
            handle,
            rects: Vec::new(),
            groups: BTreeMap::new(),
            x: vec![0.0; n],
        };
        let center = vec![0.5; n];
        let f = st.eval(&center)?;
        st.insert(Rect { center, level: vec![0; n], f });
        loop {
            st.handle.check_time()?;
            for idx in st.select(self.epsilon) {
                // a side trisected this often is below f64 resolution
                if st.rects[idx].level.iter().all(|&l| l >= 33) {
                    return Ok(());
                }
                st.divide(idx)?;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{functions, run_optimizer, Problem};
    use super::*;

    #[test]
    fn first_point_is_the_center() {
        let f = functions::sphere;
        let p = Problem::new(vec![(-1.0, 1.0); 10], &f);
        let r = run_optimizer(&Direct::default(), &p, 50, None, 0).unwrap();
        assert_eq!(r.trace.milestones[0], (1, 0.0));
        let g = |x: &[f64]| (x[0] - 3.0).abs() + x[1];
        let p = Problem::new(vec![(2.0, 4.0), (10.0, 20.0)], &g);
        let r = run_optimizer(&Direct::default(), &p, 1, None, 0).unwrap();
        assert_eq!(r.best_x, vec![3.0, 15.0]);
    }

    #[test]
    fn sphere_six_dimensions() {
        let f = |x: &[f64]| functions::sphere(&x.iter().map(|v| v - 0.3).collect::<Vec<_>>());
        let p = Problem::new(vec![(-1.0, 1.0); 6], &f);
        let r = run_optimizer(&Direct::default(), &p, 5000, None, 0).unwrap();
        assert!(r.best_f < 1e-6, "{}", r.best_f);
    }

    #[test]
    fn first_division_probes_the_axes() {
        let seen = std::sync::Mutex::new(Vec::new());
        let f = |x: &[f64]| {
            seen.lock().unwrap().push(x.to_vec());
            functions::sphere(x)
        };
        let p = Problem::new(vec![(0.0, 3.0); 2], &f);
        run_optimizer(&Direct::default(), &p, 5, None, 0).unwrap();
        let seen = seen.into_inner().unwrap();
        assert_eq!(seen, vec![vec![1.5, 1.5], vec![0.5, 1.5], vec![2.5, 1.5], vec![1.5, 0.5], vec![1.5, 2.5]]);
    }
}
