mod common;

use proptest::prelude::*;
use rand::Rng;
use uavbench::ela::{clean_features, compute_features, transform_values, FeatureMatrix, Sample, ValueTransform};

fn sample(values: impl Fn(&[f64]) -> f64, seed: u64) -> Sample {
    let mut rng = common::rng(seed);
    let points: Vec<Vec<f64>> = (0..300).map(|_| (0..3).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
    let values = points.iter().map(|p| values(p)).collect();
    Sample { points, values, bounds: vec![(-2.0, 2.0); 3], transform: ValueTransform::None }
}

fn landscape(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v - (3.0 * v).cos()).sum::<f64>() + 0.3 * x[0] * x[1]
}

#[test]
fn positive_affine_value_changes_leave_shape_features_alone() {
    for seed in 0..5 {
        let a = compute_features(&sample(landscape, seed)).unwrap();
        let b = compute_features(&sample(|x| 40.0 * landscape(x) + 3.0, seed)).unwrap();
        for (name, &va) in &a {
            if name.starts_with("ic.") || name.starts_with("pca.") && !name.ends_with("_x") {
                continue;
            }
            let vb = b[name];
            if name.starts_with("disp.") || name == "ela_distr.number_of_peaks" {
                assert_eq!(va, vb, "{name}");
            } else {
                assert!((va - vb).abs() <= 1e-8 * va.abs().max(1.0), "{name}: {va} vs {vb}");
            }
        }
    }
}

proptest! {
    #[test]
    fn transform_preserves_order(raw in prop::collection::vec(-1000i32..1000, 2..60), scale in 1e-3..1e6f64) {
        let values: Vec<f64> = raw.iter().map(|&v| f64::from(v) * scale).collect();
        let t = transform_values(&values);
        for i in 0..values.len() {
            for j in 0..values.len() {
                if values[i] < values[j] {
                    prop_assert!(t[i] < t[j], "{} -> {}, {} -> {}", values[i], t[i], values[j], t[j]);
                }
            }
        }
    }

    #[test]
    fn cleaning_is_idempotent(rows in prop::collection::vec(prop::collection::vec(-10.0..10.0f64, 6), 4..12)) {
        let names: Vec<String> = (0..6).map(|k| format!("f{k}")).collect();
        let mut vectors = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            let mut v: std::collections::BTreeMap<String, f64> = names.iter().cloned().zip(row.iter().copied()).collect();
            v.insert("constant".into(), 1.0);
            v.insert("twice_f0".into(), 2.0 * row[0] + 1.0);
            vectors.push((format!("p{i}"), "t".to_string(), v));
        }
        let once = clean_features(&FeatureMatrix::from_vectors(vectors)).unwrap();
        prop_assert!(!once.names.contains(&"constant".to_string()));
        prop_assert!(!(once.names.contains(&"f0".to_string()) && once.names.contains(&"twice_f0".to_string())));
        let twice = clean_features(&once).unwrap();
        prop_assert_eq!(&once.names, &twice.names);
        for (a, b) in once.values.iter().flatten().zip(twice.values.iter().flatten()) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}
