use std::path::Path;

use serde::Serialize;

use super::{friedman_ranks, holm_bonferroni, relative_errors, wilcoxon_signed_rank, wins, ResultsMatrix, StatsError};
use crate::instancegen::DensityClass;

/// Tolerance used for win attribution in the summary table.
pub const WIN_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub method: String,
    pub mean_rel_error: f64,
    pub wins: usize,
    pub friedman_rank: f64,
}

/// Mean relative error, wins and Friedman rank per method, in matrix order.
pub fn summary_table(m: &ResultsMatrix) -> Result<Vec<SummaryRow>, StatsError> {
    let errors = relative_errors(m)?;
    let w = wins(m, WIN_TOLERANCE);
    let ranks = if m.methods.len() >= 2 {
        friedman_ranks(m)?
    } else {
        vec![1.0; m.methods.len()]
    };
    let n = m.values.len().max(1) as f64;
    Ok(m.methods
        .iter()
        .enumerate()
        .map(|(j, name)| SummaryRow {
            method: name.clone(),
            mean_rel_error: errors.iter().map(|r| r[j]).sum::<f64>() / n,
            wins: w[j],
            friedman_rank: ranks[j],
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignificanceRow {
    pub method: String,
    /// Wilcoxon p-value against the best method; empty when the pair has
    /// too few non-zero differences to test.
    pub p: Option<f64>,
    /// Holm-adjusted p-value.
    pub p_star: Option<f64>,
}

/// The best method (lowest Friedman rank, then lowest mean relative error,
/// then name) and each other method's Wilcoxon test against it.
pub fn significance_table(m: &ResultsMatrix, best: Option<&str>) -> Result<(String, Vec<SignificanceRow>), StatsError> {
    let summary = summary_table(m)?;
    let best_idx = match best {
        Some(name) => m
            .methods
            .iter()
            .position(|x| x == name)
            .ok_or(StatsError::Mismatched)?,
        None => (0..summary.len())
            .min_by(|&a, &b| {
                let (x, y) = (&summary[a], &summary[b]);
                x.friedman_rank
                    .total_cmp(&y.friedman_rank)
                    .then(x.mean_rel_error.total_cmp(&y.mean_rel_error))
                    .then(x.method.cmp(&y.method))
            })
            .ok_or(StatsError::TooSmall { what: "methods", needed: 1, got: 0 })?,
    };
    let best_col = m.column(best_idx);
    let mut rows = Vec::new();
    let mut raw = Vec::new();
    for (j, name) in m.methods.iter().enumerate() {
        if j == best_idx {
            continue;
        }
        let p = match wilcoxon_signed_rank(&best_col, &m.column(j)) {
            Ok(w) => Some(w.p_value),
            Err(StatsError::TooSmall { .. }) => None,
            Err(e) => return Err(e),
        };
        if let Some(p) = p {
            raw.push(p);
        }
        rows.push(SignificanceRow {
            method: name.clone(),
            p,
            p_star: None,
        });
    }
    let mut adjusted = holm_bonferroni(&raw).into_iter();
    for row in rows.iter_mut().filter(|r| r.p.is_some()) {
        row.p_star = adjusted.next();
    }
    Ok((m.methods[best_idx].clone(), rows))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImprovementRow {
    pub method: String,
    pub budget_step: String,
    /// `low`, `high` or `all`.
    pub density: String,
    pub improvement: f64,
}

/// Name used for the over-all-methods rows.
pub const ALL_METHODS: &str = "all";

/// Mean relative improvement `(v_low - v_high) / v_low` from the smaller to
/// the larger budget, per method and over all methods, split by density.
pub fn budget_improvement(low: &ResultsMatrix, high: &ResultsMatrix, budget_step: &str) -> Result<Vec<ImprovementRow>, StatsError> {
    if low.instances != high.instances || low.methods != high.methods {
        return Err(StatsError::Mismatched);
    }
    let classes: [(&str, Option<DensityClass>); 3] = [
        ("low", Some(DensityClass::Low)),
        ("high", Some(DensityClass::High)),
        ("all", None),
    ];
    let gain = |i: usize, j: usize| -> Result<f64, StatsError> {
        let v = low.values[i][j];
        if v == 0.0 {
            return Err(StatsError::NonPositiveBest(low.instances[i].clone()));
        }
        Ok((v - high.values[i][j]) / v)
    };
    let mut rows = Vec::new();
    let k = low.methods.len();
    for j in 0..=k {
        let cols: Vec<usize> = if j < k { vec![j] } else { (0..k).collect() };
        let name = if j < k { low.methods[j].as_str() } else { ALL_METHODS };
        for (label, class) in classes {
            let members: Vec<usize> = (0..low.instances.len())
                .filter(|&i| class.is_none() || low.density[i] == class)
                .collect();
            if members.is_empty() {
                continue;
            }
            let mut sum = 0.0;
            for &i in &members {
                for &c in &cols {
                    sum += gain(i, c)?;
                }
            }
            rows.push(ImprovementRow {
                method: name.to_string(),
                budget_step: budget_step.to_string(),
                density: label.to_string(),
                improvement: sum / (members.len() * cols.len()) as f64,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariableDimensionRow {
    pub base_budget: u64,
    pub dv: usize,
    /// Instances whose overall best was found at this DV (ties go to the
    /// smallest DV).
    pub wins: usize,
    /// Mean relative error of this DV's best against the overall best.
    pub mean_rel_error: f64,
}

/// Compares the best values found at each DV on a common instance set.
pub fn variable_dimension_table(base_budget: u64, per_dv: &[(usize, ResultsMatrix)]) -> Result<Vec<VariableDimensionRow>, StatsError> {
    let mut order: Vec<usize> = (0..per_dv.len()).collect();
    order.sort_by_key(|&k| per_dv[k].0);
    let Some(&first) = order.first() else {
        return Ok(Vec::new());
    };
    let instances = &per_dv[first].1.instances;
    if per_dv.iter().any(|(_, m)| &m.instances != instances) {
        return Err(StatsError::Mismatched);
    }
    let bests: Vec<Vec<f64>> = order
        .iter()
        .map(|&k| per_dv[k].1.values.iter().map(|r| r.iter().copied().fold(f64::INFINITY, f64::min)).collect())
        .collect();
    let mut wins = vec![0; order.len()];
    let mut err_sum = vec![0.0; order.len()];
    for i in 0..instances.len() {
        let overall = bests.iter().map(|b| b[i]).fold(f64::INFINITY, f64::min);
        if !(overall > 0.0) {
            return Err(StatsError::NonPositiveBest(instances[i].clone()));
        }
        let winner = bests.iter().position(|b| b[i] == overall).expect("minimum is attained");
        wins[winner] += 1;
        for (k, b) in bests.iter().enumerate() {
            err_sum[k] += (b[i] - overall) / overall;
        }
    }
    let n = instances.len().max(1) as f64;
    Ok(order
        .iter()
        .enumerate()
        .map(|(k, &idx)| VariableDimensionRow {
            base_budget,
            dv: per_dv[idx].0,
            wins: wins[k],
            mean_rel_error: err_sum[k] / n,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelativeErrorRow {
    pub dv: usize,
    pub base_budget: u64,
    pub instance_id: String,
    pub method: String,
    pub rel_error: f64,
}

/// Relative errors in long format, one row per (instance, method).
pub fn relative_error_rows(m: &ResultsMatrix, dv: usize, base_budget: u64) -> Result<Vec<RelativeErrorRow>, StatsError> {
    let errors = relative_errors(m)?;
    let mut rows = Vec::with_capacity(m.instances.len() * m.methods.len());
    for (i, inst) in m.instances.iter().enumerate() {
        for (j, method) in m.methods.iter().enumerate() {
            rows.push(RelativeErrorRow {
                dv,
                base_budget,
                instance_id: inst.clone(),
                method: method.clone(),
                rel_error: errors[i][j],
            });
        }
    }
    Ok(rows)
}

/// Writes serializable rows as CSV with a header.
pub fn write_csv<R: Serialize>(path: &Path, rows: &[R]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
