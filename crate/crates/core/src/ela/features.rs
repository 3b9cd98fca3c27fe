use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{ElaError, FeatureVector, Sample};

const DISP_QUANTILES: [(f64, &str); 4] = [(0.02, "02"), (0.05, "05"), (0.10, "10"), (0.25, "25")];

/// Points rescaled to the unit box, so distance-based features do not
/// depend on the units of individual coordinates.
fn unit_points(s: &Sample) -> Vec<Vec<f64>> {
    s.points
        .iter()
        .map(|p| {
            p.iter()
                .zip(&s.bounds)
                .map(|(&v, &(lo, hi))| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 })
                .collect()
        })
        .collect()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sd(v: &[f64]) -> f64 {
    let m = mean(v);
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() as f64 - 1.0)).sqrt()
}

fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

fn median_f32(v: &mut [f32]) -> f64 {
    let n = v.len();
    let (_, &mut hi, _) = v.select_nth_unstable_by(n / 2, f32::total_cmp);
    if n % 2 == 1 {
        hi as f64
    } else {
        let lo = v[..n / 2].iter().copied().fold(f32::NEG_INFINITY, f32::max);
        0.5 * (lo as f64 + hi as f64)
    }
}

/// Computes every feature set. Values are used as stored in the sample
/// (see [`Sample::transformed`]).
pub fn compute_features(s: &Sample) -> Result<FeatureVector, ElaError> {
    let dim = s.dim();
    let n = s.len();
    if n < 10 * dim || n < 3 {
        return Err(ElaError::TooFewPoints { got: n, needed: (10 * dim).max(3), dim });
    }
    let mut out = FeatureVector::new();
    distribution(&s.values, &mut out);
    meta_models(s, &mut out)?;
    let unit = unit_points(s);
    neighbourhood(&unit, &s.values, &mut out)?;
    principal_components(s, &mut out)?;
    information_content(&unit, &s.values, &mut out);
    Ok(out)
}

fn distribution(y: &[f64], out: &mut FeatureVector) {
    let n = y.len() as f64;
    let m = mean(y);
    let m2 = y.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
    let m3 = y.iter().map(|v| (v - m).powi(3)).sum::<f64>() / n;
    let m4 = y.iter().map(|v| (v - m).powi(4)).sum::<f64>() / n;
    out.insert("ela_distr.skewness".into(), m3 / m2.powf(1.5));
    out.insert("ela_distr.kurtosis".into(), m4 / (m2 * m2) - 3.0);
    out.insert("ela_distr.number_of_peaks".into(), density_peaks(y, m2.sqrt()));
}

/// Modes of a Gaussian kernel density estimate (Silverman bandwidth) on a
/// 512-point grid, ignoring bumps below 1% of the highest one.
fn density_peaks(y: &[f64], sd: f64) -> f64 {
    let lo = y.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) || !(sd > 0.0) {
        return f64::NAN;
    }
    let h = 1.06 * sd * (y.len() as f64).powf(-0.2);
    let grid: Vec<f64> = (0..512).map(|k| lo - 3.0 * h + (hi - lo + 6.0 * h) * k as f64 / 511.0).collect();
    let dens: Vec<f64> = grid
        .iter()
        .map(|&g| y.iter().map(|&v| (-0.5 * ((g - v) / h).powi(2)).exp()).sum::<f64>())
        .collect();
    let top = dens.iter().copied().fold(0.0, f64::max);
    let peaks = (1..dens.len() - 1)
        .filter(|&k| dens[k] > dens[k - 1] && dens[k] >= dens[k + 1] && dens[k] >= 0.01 * top)
        .count();
    peaks as f64
}

fn least_squares(x: &DMatrix<f64>, y: &DVector<f64>) -> Option<(DVector<f64>, f64)> {
    let coef = x.clone().svd(true, true).solve(y, 1e-12).ok()?;
    let fitted = x * &coef;
    let my = y.mean();
    let ss_tot: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let ss_res: f64 = y.iter().zip(fitted.iter()).map(|(a, b)| (a - b).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { f64::NAN };
    Some((coef, r2))
}

fn meta_models(s: &Sample, out: &mut FeatureVector) -> Result<(), ElaError> {
    let n = s.len();
    let d = s.dim();
    let y = DVector::from_column_slice(&s.values);
    let lin = DMatrix::from_fn(n, d + 1, |i, j| if j == 0 { 1.0 } else { s.points[i][j - 1] });
    let quad = DMatrix::from_fn(n, 2 * d + 1, |i, j| match j {
        0 => 1.0,
        j if j <= d => s.points[i][j - 1],
        j => s.points[i][j - d - 1].powi(2),
    });
    let fail = || ElaError::Degenerate {
        set: "ela_meta",
        reason: "least-squares fit failed".into(),
    };
    let (lc, lr2) = least_squares(&lin, &y).ok_or_else(fail)?;
    let (qc, qr2) = least_squares(&quad, &y).ok_or_else(fail)?;
    let ratio = |c: &[f64]| {
        let a: Vec<f64> = c.iter().map(|v| v.abs()).collect();
        let mx = a.iter().copied().fold(0.0, f64::max);
        let mn = a.iter().copied().fold(f64::INFINITY, f64::min);
        (mn, mx)
    };
    let (lmin, lmax) = ratio(&lc.as_slice()[1..]);
    let (qmin, qmax) = ratio(&qc.as_slice()[d + 1..]);
    out.insert("ela_meta.lin_simple.r2".into(), lr2);
    out.insert("ela_meta.lin_simple.coef_min_max_ratio".into(), lmin / lmax);
    out.insert("ela_meta.quad_simple.r2".into(), qr2);
    out.insert("ela_meta.quad_simple.cond".into(), qmax / qmin);
    Ok(())
}

/// Dispersion and nearest-better features from one pass over all pairs.
fn neighbourhood(x: &[Vec<f64>], y: &[f64], out: &mut FeatureVector) -> Result<(), ElaError> {
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| y[a].total_cmp(&y[b]));
    let mut rank = vec![0; n];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    let sizes: Vec<usize> = DISP_QUANTILES
        .iter()
        .map(|&(q, _)| ((q * n as f64).ceil() as usize).max(2))
        .collect();
    let mut all = Vec::with_capacity(n * (n - 1) / 2);
    let mut all_sum = 0.0;
    let mut subset: Vec<Vec<f32>> = sizes.iter().map(|_| Vec::new()).collect();
    let mut subset_sum = vec![0.0; sizes.len()];
    let mut nn = vec![f64::INFINITY; n];
    let mut nb = vec![f64::INFINITY; n];
    let mut nb_idx = vec![usize::MAX; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = dist(&x[i], &x[j]);
            all.push(d as f32);
            all_sum += d;
            let worst = rank[i].max(rank[j]);
            for (k, &size) in sizes.iter().enumerate() {
                if worst < size {
                    subset[k].push(d as f32);
                    subset_sum[k] += d;
                }
            }
            nn[i] = nn[i].min(d);
            nn[j] = nn[j].min(d);
            // nearest strictly better point; ties go to the lower index
            if y[j] < y[i] && d < nb[i] {
                nb[i] = d;
                nb_idx[i] = j;
            }
            if y[i] < y[j] && d < nb[j] {
                nb[j] = d;
                nb_idx[j] = i;
            }
        }
    }
    let all_mean = all_sum / all.len() as f64;
    if !(all_mean > 0.0) {
        return Err(ElaError::Degenerate {
            set: "disp",
            reason: "all sample points coincide".into(),
        });
    }
    let all_median = median_f32(&mut all);
    drop(all);
    for (k, &(_, tag)) in DISP_QUANTILES.iter().enumerate() {
        let m = subset_sum[k] / subset[k].len() as f64;
        let med = median_f32(&mut subset[k]);
        out.insert(format!("disp.ratio_mean_{tag}"), m / all_mean);
        out.insert(format!("disp.ratio_median_{tag}"), med / all_median);
        out.insert(format!("disp.diff_mean_{tag}"), m - all_mean);
        out.insert(format!("disp.diff_median_{tag}"), med - all_median);
    }

    // points with a better neighbour (everything but the best value's ties)
    let has: Vec<usize> = (0..n).filter(|&i| nb_idx[i] != usize::MAX).collect();
    if has.len() < 2 {
        for name in ["sd_ratio", "mean_ratio", "cor", "coeff_var", "fitness_cor"] {
            out.insert(format!("nbc.{name}"), f64::NAN);
        }
        return Ok(());
    }
    let nn_h: Vec<f64> = has.iter().map(|&i| nn[i]).collect();
    let nb_h: Vec<f64> = has.iter().map(|&i| nb[i]).collect();
    let ratio: Vec<f64> = nn_h.iter().zip(&nb_h).map(|(a, b)| a / b).collect();
    let mut indegree = vec![0.0; n];
    for &i in &has {
        indegree[nb_idx[i]] += 1.0;
    }
    out.insert("nbc.nn_nb.sd_ratio".into(), sd(&nn_h) / sd(&nb_h));
    out.insert("nbc.nn_nb.mean_ratio".into(), mean(&nn_h) / mean(&nb_h));
    out.insert("nbc.nn_nb.cor".into(), correlation(&nn_h, &nb_h));
    out.insert("nbc.dist_ratio.coeff_var".into(), sd(&ratio) / mean(&ratio));
    out.insert("nbc.nb_fitness.cor".into(), correlation(&indegree, y));
    Ok(())
}

/// Share of components needed for 90% of the variance, and the first
/// component's share, for covariance and correlation PCA on the points and
/// on points plus values.
fn principal_components(s: &Sample, out: &mut FeatureVector) -> Result<(), ElaError> {
    let n = s.len();
    let d = s.dim();
    let x = DMatrix::from_fn(n, d, |i, j| s.points[i][j]);
    let xy = DMatrix::from_fn(n, d + 1, |i, j| if j < d { s.points[i][j] } else { s.values[i] });
    for (data, tag) in [(&x, "x"), (&xy, "init")] {
        let cov = covariance(data);
        let cor = to_correlation(&cov);
        for (m, kind) in [(cov, "cov"), (cor, "cor")] {
            let (needed, first) = match m.as_ref().map(spectrum) {
                Some(Some(v)) => v,
                _ => (f64::NAN, f64::NAN),
            };
            out.insert(format!("pca.expl_var.{kind}_{tag}"), needed);
            out.insert(format!("pca.expl_var_pc1.{kind}_{tag}"), first);
        }
    }
    Ok(())
}

pub(crate) fn covariance(data: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = data.nrows();
    if n < 2 {
        return None;
    }
    let means = data.row_mean();
    let centered = DMatrix::from_fn(n, data.ncols(), |i, j| data[(i, j)] - means[j]);
    Some(centered.transpose() * &centered / (n as f64 - 1.0))
}

fn to_correlation(cov: &Option<DMatrix<f64>>) -> Option<DMatrix<f64>> {
    let c = cov.as_ref()?;
    let sd: Vec<f64> = (0..c.nrows()).map(|i| c[(i, i)].sqrt()).collect();
    if sd.iter().any(|&v| !(v > 0.0)) {
        return None;
    }
    Some(DMatrix::from_fn(c.nrows(), c.ncols(), |i, j| c[(i, j)] / (sd[i] * sd[j])))
}

fn spectrum(m: &DMatrix<f64>) -> Option<(f64, f64)> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().map(|v| v.max(0.0)).collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    let total: f64 = ev.iter().sum();
    if !(total > 0.0) {
        return None;
    }
    let mut acc = 0.0;
    let mut needed = ev.len();
    for (k, v) in ev.iter().enumerate() {
        acc += v;
        if acc / total >= 0.9 {
            needed = k + 1;
            break;
        }
    }
    Some((needed as f64 / ev.len() as f64, ev[0] / total))
}

/// Information content along a walk that starts at the first sample point
/// and always moves to the nearest unvisited point.
fn information_content(x: &[Vec<f64>], y: &[f64], out: &mut FeatureVector) {
    let n = x.len();
    let mut visited = vec![false; n];
    let mut walk = Vec::with_capacity(n);
    let mut cur = 0;
    visited[0] = true;
    walk.push(0);
    for _ in 1..n {
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        for j in 0..n {
            if !visited[j] {
                let d = dist(&x[cur], &x[j]);
                if d < best_d {
                    best_d = d;
                    best = j;
                }
            }
        }
        visited[best] = true;
        walk.push(best);
        cur = best;
    }
    let slopes: Vec<f64> = walk
        .windows(2)
        .map(|w| {
            let d = dist(&x[w[0]], &x[w[1]]);
            if d > 0.0 {
                (y[w[1]] - y[w[0]]) / d
            } else {
                0.0
            }
        })
        .collect();
    let symbols = |eps: f64| -> Vec<i8> {
        slopes
            .iter()
            .map(|&s| if s < -eps { -1 } else if s > eps { 1 } else { 0 })
            .collect()
    };
    let entropy = |sym: &[i8]| -> f64 {
        let mut counts = [[0usize; 3]; 3];
        for w in sym.windows(2) {
            counts[(w[0] + 1) as usize][(w[1] + 1) as usize] += 1;
        }
        let total = (sym.len().saturating_sub(1)).max(1) as f64;
        let mut h = 0.0;
        for (a, row) in counts.iter().enumerate() {
            for (b, &c) in row.iter().enumerate() {
                if a != b && c > 0 {
                    let p = c as f64 / total;
                    h -= p * p.ln() / 6f64.ln();
                }
            }
        }
        h
    };
    // epsilon grid: 0 and 10^-5 .. 10^15
    let grid: Vec<f64> = std::iter::once(0.0)
        .chain((0..1000).map(|k| 10f64.powf(-5.0 + 20.0 * k as f64 / 999.0)))
        .collect();
    let hs: Vec<f64> = grid.iter().map(|&e| entropy(&symbols(e))).collect();
    let (arg, h_max) = hs
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (k, &h)| if h > acc.1 { (k, h) } else { acc });
    let eps_s = grid
        .iter()
        .zip(&hs)
        .find(|&(_, &h)| h < 0.05)
        .map_or(f64::NAN, |(&e, _)| if e > 0.0 { e.log10() } else { -5.0 });
    let mut chain: Vec<i8> = symbols(0.0).into_iter().filter(|&v| v != 0).collect();
    chain.dedup();
    out.insert("ic.h_max".into(), h_max);
    out.insert("ic.eps_s".into(), eps_s);
    out.insert("ic.eps_max".into(), if grid[arg] > 0.0 { grid[arg].log10() } else { -5.0 });
    out.insert("ic.m0".into(), chain.len() as f64 / slopes.len() as f64);
}

#[cfg(test)]
mod tests {
    use super::super::sample_uniform;
    use super::*;

    #[test]
    fn linear_function_fits_exactly() {
        let f = |x: &[f64]| 3.0 + x.iter().enumerate().map(|(i, v)| (i as f64 + 1.0) * v).sum::<f64>();
        let s = sample_uniform(&f, &[(-1.0, 1.0); 3], 50, 1).unwrap();
        let feats = compute_features(&s).unwrap();
        assert!((feats["ela_meta.lin_simple.r2"] - 1.0).abs() < 1e-9);
        assert!((feats["ela_meta.lin_simple.coef_min_max_ratio"] - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn symmetric_values_have_no_skew() {
        let f = |x: &[f64]| x[0];
        let mut s = sample_uniform(&f, &[(-1.0, 1.0); 30], 125, 2).unwrap();
        // mirror every point so values come in +/- pairs
        let mirrored: Vec<Vec<f64>> = s.points.iter().map(|p| p.iter().map(|v| -v).collect()).collect();
        s.values.extend(mirrored.iter().map(|p| p[0]));
        s.points.extend(mirrored);
        assert_eq!(s.len(), 7500);
        let feats = compute_features(&s).unwrap();
        assert!(feats["ela_distr.skewness"].abs() < 0.05);
    }

    #[test]
    fn sphere_best_points_cluster() {
        let f = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
        let s = sample_uniform(&f, &[(-5.0, 5.0); 5], 250, 7).unwrap().transformed();
        let feats = compute_features(&s).unwrap();
        for tag in ["02", "05", "10", "25"] {
            assert!(feats[&format!("disp.ratio_mean_{tag}")] < 1.0);
            assert!(feats[&format!("disp.ratio_median_{tag}")] < 1.0);
        }
        assert!(feats.values().filter(|v| v.is_finite()).count() >= 30);
        eprintln!("{feats:#?}");
    }

    #[test]
    fn identical_points_are_rejected() {
        let s = Sample {
            points: vec![vec![0.5, 0.5]; 40],
            values: vec![1.0; 40],
            bounds: vec![(0.0, 1.0); 2],
            transform: Default::default(),
        };
        let err = compute_features(&s).unwrap_err();
        assert!(matches!(err, ElaError::Degenerate { .. }), "{err}");
    }

    #[test]
    fn too_few_points() {
        let f = |x: &[f64]| x[0];
        let s = sample_uniform(&f, &[(0.0, 1.0); 4], 5, 0).unwrap();
        assert!(matches!(compute_features(&s), Err(ElaError::TooFewPoints { .. })));
    }
}
