use std::collections::BTreeSet;
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};

use super::features::covariance;
use super::{ElaError, FeatureVector};

/// Features whose absolute correlation with an earlier kept feature
/// exceeds this are dropped.
pub const CORRELATION_THRESHOLD: f64 = 0.95;

/// Problems × features.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub labels: Vec<String>,
    /// Suite tag per problem (e.g. which benchmark set it came from).
    pub tags: Vec<String>,
    /// Feature names in canonical (sorted) order.
    pub names: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl FeatureMatrix {
    /// Stacks feature vectors; a feature missing from a problem is NaN.
    pub fn from_vectors(rows: Vec<(String, String, FeatureVector)>) -> Self {
        let names: Vec<String> = rows
            .iter()
            .flat_map(|(_, _, f)| f.keys().cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let values = rows
            .iter()
            .map(|(_, _, f)| names.iter().map(|n| f.get(n).copied().unwrap_or(f64::NAN)).collect())
            .collect();
        Self {
            labels: rows.iter().map(|r| r.0.clone()).collect(),
            tags: rows.iter().map(|r| r.1.clone()).collect(),
            names,
            values,
        }
    }

    fn column(&self, j: usize) -> Vec<f64> {
        self.values.iter().map(|r| r[j]).collect()
    }

    fn select(&self, keep: &[usize]) -> Self {
        Self {
            labels: self.labels.clone(),
            tags: self.tags.clone(),
            names: keep.iter().map(|&j| self.names[j].clone()).collect(),
            values: self.values.iter().map(|r| keep.iter().map(|&j| r[j]).collect()).collect(),
        }
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["problem".to_string(), "tag".to_string()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header)?;
        for (i, row) in self.values.iter().enumerate() {
            let mut rec = vec![self.labels[i].clone(), self.tags[i].clone()];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, var.sqrt())
}

fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let (ma, sa) = mean_sd(a);
    let (mb, sb) = mean_sd(b);
    let cov = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (a.len() as f64 - 1.0);
    cov / (sa * sb)
}

/// Drops features that are non-finite anywhere or constant, prunes
/// features correlated above [`CORRELATION_THRESHOLD`] with an earlier one
/// (in name order), then z-normalizes the rest.
pub fn clean_features(m: &FeatureMatrix) -> Result<FeatureMatrix, ElaError> {
    if m.values.len() < 2 {
        return Err(ElaError::TooSmall { what: "problems", needed: 2, got: m.values.len() });
    }
    let valid: Vec<usize> = (0..m.names.len())
        .filter(|&j| {
            let col = m.column(j);
            if col.iter().any(|v| !v.is_finite()) {
                return false;
            }
            let (_, sd) = mean_sd(&col);
            let scale = col.iter().fold(1.0f64, |a, v| a.max(v.abs()));
            sd > 1e-12 * scale
        })
        .collect();
    let mut kept: Vec<usize> = Vec::new();
    for &j in &valid {
        let col = m.column(j);
        if kept
            .iter()
            .all(|&k| correlation(&col, &m.column(k)).abs() <= CORRELATION_THRESHOLD)
        {
            kept.push(j);
        }
    }
    if kept.len() < 2 {
        return Err(ElaError::TooSmall { what: "surviving features", needed: 2, got: kept.len() });
    }
    let mut out = m.select(&kept);
    for j in 0..kept.len() {
        let (mu, sd) = mean_sd(&out.column(j));
        for row in &mut out.values {
            row[j] = (row[j] - mu) / sd;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub labels: Vec<String>,
    pub tags: Vec<String>,
    /// `coords[i]` has one entry per kept component.
    pub coords: Vec<Vec<f64>>,
    /// Variance share of every component, largest first.
    pub explained: Vec<f64>,
}

impl Projection {
    pub fn write_csv(&self, path: &Path) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_path(path)?;
        let k = self.coords.first().map_or(0, Vec::len);
        let mut header = vec!["problem".to_string(), "tag".to_string()];
        header.extend((1..=k).map(|c| format!("pc{c}")));
        w.write_record(&header)?;
        for (i, c) in self.coords.iter().enumerate() {
            let mut rec = vec![self.labels[i].clone(), self.tags[i].clone()];
            rec.extend(c.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Projects (already cleaned) features onto their first `k` principal
/// components. Each axis is oriented so its largest loading is positive.
pub fn pca_project(m: &FeatureMatrix, k: usize) -> Result<Projection, ElaError> {
    let n = m.values.len();
    let d = m.names.len();
    if n < 2 {
        return Err(ElaError::TooSmall { what: "problems", needed: 2, got: n });
    }
    if d < k.max(1) {
        return Err(ElaError::TooSmall { what: "features", needed: k.max(1), got: d });
    }
    let data = DMatrix::from_fn(n, d, |i, j| m.values[i][j]);
    let cov = covariance(&data).expect("n >= 2");
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let vals: Vec<f64> = order.iter().map(|&c| eig.eigenvalues[c].max(0.0)).collect();
    let total: f64 = vals.iter().sum();
    let explained = vals.iter().map(|v| if total > 0.0 { v / total } else { 0.0 }).collect();
    let means = data.row_mean();
    let mut coords = vec![Vec::with_capacity(k); n];
    for &c in order.iter().take(k) {
        let v = eig.eigenvectors.column(c);
        let pivot = (0..d).fold(0, |b, r| if v[r].abs() > v[b].abs() { r } else { b });
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        for (i, coord) in coords.iter_mut().enumerate() {
            let s: f64 = (0..d).map(|j| (data[(i, j)] - means[j]) * v[j]).sum();
            coord.push(sign * s);
        }
    }
    Ok(Projection {
        labels: m.labels.clone(),
        tags: m.tags.clone(),
        coords,
        explained,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fm(values: Vec<Vec<f64>>, names: &[&str]) -> FeatureMatrix {
        FeatureMatrix {
            labels: (0..values.len()).map(|i| format!("p{i}")).collect(),
            tags: vec!["t".into(); values.len()],
            names: names.iter().map(|s| s.to_string()).collect(),
            values,
        }
    }

    #[test]
    fn cleaning_rules() {
        let m = fm(
            vec![
                vec![1.0, 5.0, 2.0, 0.3, f64::NAN],
                vec![2.0, 5.0, 4.0, 0.1, 1.0],
                vec![3.0, 5.0, 6.1, 0.9, 2.0],
                vec![4.0, 5.0, 8.0, 0.2, 3.0],
            ],
            &["a", "b", "c", "d", "e"],
        );
        let c = clean_features(&m).unwrap();
        assert_eq!(c.names, vec!["a", "d"]);
        let again = clean_features(&c).unwrap();
        assert_eq!(again.names, c.names);
        for (r1, r2) in c.values.iter().zip(&again.values) {
            for (a, b) in r1.iter().zip(r2) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn identical_rows_coincide() {
        let m = fm(
            vec![vec![1.0, 0.0, 3.0], vec![1.0, 0.0, 3.0], vec![2.0, 5.0, 1.0], vec![0.0, 1.0, 1.5]],
            &["a", "b", "c"],
        );
        let c = clean_features(&m).unwrap();
        let p = pca_project(&c, 2).unwrap();
        assert_eq!(p.coords[0], p.coords[1]);
        let total: f64 = p.explained.iter().sum();
        assert!(total <= 1.0 + 1e-9);
        assert!(p.explained.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn too_few_features() {
        let m = fm(vec![vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]], &["a", "b"]);
        assert!(matches!(clean_features(&m), Err(ElaError::TooSmall { .. })));
    }
}
