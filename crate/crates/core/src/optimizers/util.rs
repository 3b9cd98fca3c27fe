use rand::Rng as _;

use crate::seeding::Rng;

pub(crate) fn uniform_point(bounds: &[(f64, f64)], rng: &mut Rng) -> Vec<f64> {
    bounds.iter().map(|&(lo, hi)| uniform_in(lo, hi, rng)).collect()
}

pub(crate) fn uniform_in(lo: f64, hi: f64, rng: &mut Rng) -> f64 {
    if hi > lo {
        (lo + rng.random::<f64>() * (hi - lo)).min(hi)
    } else {
        lo
    }
}

/// Mirrors `v` back into `[lo, hi]` as many times as needed.
pub(crate) fn reflect(v: f64, lo: f64, hi: f64) -> f64 {
    let width = hi - lo;
    if !(width > 0.0) || !v.is_finite() {
        return lo.max(v.min(hi)).max(lo);
    }
    if (lo..=hi).contains(&v) {
        return v;
    }
    let t = (v - lo).rem_euclid(2.0 * width);
    let t = if t > width { 2.0 * width - t } else { t };
    (lo + t).clamp(lo, hi)
}

/// Wraps `v` onto the circle `[lo, hi)`.
pub(crate) fn wrap(v: f64, lo: f64, hi: f64) -> f64 {
    let width = hi - lo;
    if !(width > 0.0) || !v.is_finite() {
        return lo;
    }
    if (lo..=hi).contains(&v) {
        return v;
    }
    (lo + (v - lo).rem_euclid(width)).clamp(lo, hi)
}

/// Population size after `evals` of `max_evals` under linear reduction.
pub fn linear_population_size(initial: usize, last: usize, evals: usize, max_evals: usize) -> usize {
    if max_evals == 0 {
        return last;
    }
    let frac = evals.min(max_evals) as f64 / max_evals as f64;
    (initial as f64 + (last as f64 - initial as f64) * frac).round() as usize
}

/// Indices sorted by value, ties kept in index order.
pub(crate) fn argsort(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    idx
}

/// Uniform index in `0..n` different from everything in `exclude`.
pub(crate) fn pick_excluding(n: usize, exclude: &[usize], rng: &mut Rng) -> usize {
    debug_assert!(exclude.iter().filter(|&&e| e < n).count() < n);
    loop {
        let k = rng.random_range(0..n);
        if !exclude.contains(&k) {
            return k;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reflection() {
        assert_eq!(reflect(0.5, 0.0, 1.0), 0.5);
        assert!((reflect(1.25, 0.0, 1.0) - 0.75).abs() < 1e-15);
        assert!((reflect(-0.25, 0.0, 1.0) - 0.25).abs() < 1e-15);
        assert!((reflect(2.5, 0.0, 1.0) - 0.5).abs() < 1e-15);
        assert_eq!(reflect(3.0, 2.0, 2.0), 2.0);
    }

    #[test]
    fn wrapping() {
        use std::f64::consts::PI;
        assert!((wrap(PI + 0.5, -PI, PI) - (-PI + 0.5)).abs() < 1e-12);
        assert!((wrap(-PI - 0.5, -PI, PI) - (PI - 0.5)).abs() < 1e-12);
    }

    #[test]
    fn lpsr_examples() {
        assert_eq!(linear_population_size(100, 4, 500, 1000), 52);
        assert_eq!(linear_population_size(100, 4, 1000, 1000), 4);
        assert_eq!(linear_population_size(100, 4, 0, 1000), 100);
    }
}
