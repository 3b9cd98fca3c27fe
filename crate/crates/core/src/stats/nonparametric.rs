use statrs::distribution::{ContinuousCDF, Normal};

use super::{ResultsMatrix, StatsError};

/// Largest number of non-zero pairs for which the Wilcoxon p-value is
/// computed from the exact null distribution.
pub const EXACT_LIMIT: usize = 25;

/// Ascending ranks starting at 1; tied values share the mean of their ranks.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && values[idx[end]] == values[idx[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &idx[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

fn row_min(row: &[f64]) -> f64 {
    row.iter().copied().fold(f64::INFINITY, f64::min)
}

/// `(v - best) / best` per entry, with `best` the row minimum.
pub fn relative_errors(m: &ResultsMatrix) -> Result<Vec<Vec<f64>>, StatsError> {
    m.values
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let best = row_min(row);
            if !(best > 0.0) {
                return Err(StatsError::NonPositiveBest(m.instances[i].clone()));
            }
            Ok(row.iter().map(|&v| (v - best) / best).collect())
        })
        .collect()
}

/// Instances on which each method is within `tol` (relative) of the row
/// best; tied methods all score.
pub fn wins(m: &ResultsMatrix, tol: f64) -> Vec<usize> {
    let mut out = vec![0; m.methods.len()];
    for row in &m.values {
        let best = row_min(row);
        let limit = best + best.abs() * tol;
        for (j, &v) in row.iter().enumerate() {
            if v <= limit {
                out[j] += 1;
            }
        }
    }
    out
}

/// Mean per-instance rank of each method (1 = best, mid-ranks for ties).
pub fn friedman_ranks(m: &ResultsMatrix) -> Result<Vec<f64>, StatsError> {
    if m.methods.len() < 2 {
        return Err(StatsError::TooSmall { what: "methods", needed: 2, got: m.methods.len() });
    }
    if m.values.is_empty() {
        return Err(StatsError::TooSmall { what: "instances", needed: 1, got: 0 });
    }
    let mut sums = vec![0.0; m.methods.len()];
    for row in &m.values {
        for (s, r) in sums.iter_mut().zip(midranks(row)) {
            *s += r;
        }
    }
    Ok(sums.into_iter().map(|s| s / m.values.len() as f64).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wilcoxon {
    /// Two-sided p-value.
    pub p_value: f64,
    /// Sum of the ranks of positive differences `x - y`.
    pub statistic: f64,
    /// Pairs left after dropping zero differences.
    pub n: usize,
    /// From the exact null distribution rather than the normal approximation.
    pub exact: bool,
    /// Every difference was zero.
    pub degenerate: bool,
}

/// Two-sided Wilcoxon signed-rank test on paired samples. Zero differences
/// are dropped; tied magnitudes get mid-ranks. Up to [`EXACT_LIMIT`] pairs
/// the p-value counts sign assignments exactly (with the tied ranks);
/// beyond that it uses the normal approximation with tie and continuity
/// corrections.
pub fn wilcoxon_signed_rank(x: &[f64], y: &[f64]) -> Result<Wilcoxon, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).filter(|&v| v != 0.0).collect();
    let n = d.len();
    if n == 0 {
        return Ok(Wilcoxon { p_value: 1.0, statistic: 0.0, n: 0, exact: true, degenerate: true });
    }
    if n < 5 {
        return Err(StatsError::TooSmall { what: "non-zero paired differences", needed: 5, got: n });
    }
    let magnitudes: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    let ranks = midranks(&magnitudes);
    let w_plus: f64 = ranks.iter().zip(&d).filter(|(_, &v)| v > 0.0).map(|(r, _)| r).sum();

    if n <= EXACT_LIMIT {
        // ranks are multiples of 1/2, so doubled ranks are integers
        let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
        let total: usize = doubled.iter().sum();
        let mut counts = vec![0u64; total + 1];
        counts[0] = 1;
        let mut reach = 0;
        for &r in &doubled {
            for s in (0..=reach).rev() {
                if counts[s] > 0 {
                    counts[s + r] += counts[s];
                }
            }
            reach += r;
        }
        let observed = (2.0 * w_plus).round() as i64;
        let dev = (2 * observed - total as i64).abs();
        let extreme: u64 = counts
            .iter()
            .enumerate()
            .filter(|&(s, _)| (2 * s as i64 - total as i64).abs() >= dev)
            .map(|(_, &c)| c)
            .sum();
        let p = (extreme as f64 / 2f64.powi(n as i32)).min(1.0);
        return Ok(Wilcoxon { p_value: p, statistic: w_plus, n, exact: true, degenerate: false });
    }

    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let mut ties = 0.0;
    let mut sorted = magnitudes.clone();
    sorted.sort_by(f64::total_cmp);
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        ties += t * t * t - t;
        i = j;
    }
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - ties / 48.0;
    let z = ((w_plus - mean).abs() - 0.5).max(0.0) / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let p = (2.0 * normal.sf(z)).min(1.0);
    Ok(Wilcoxon { p_value: p, statistic: w_plus, n, exact: false, degenerate: false })
}

/// Holm step-down adjustment, returned in the input order.
pub fn holm_bonferroni(p: &[f64]) -> Vec<f64> {
    let m = p.len();
    let mut idx: Vec<usize> = (0..m).collect();
    idx.sort_by(|&a, &b| p[a].total_cmp(&p[b]));
    let mut out = vec![0.0; m];
    let mut running: f64 = 0.0;
    for (k, &i) in idx.iter().enumerate() {
        running = running.max(((m - k) as f64 * p[i]).min(1.0));
        out[i] = running;
    }
    out
}
