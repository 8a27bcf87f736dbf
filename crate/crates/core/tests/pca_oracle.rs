//! PCA training checked against an independent dense eigendecomposition of
//! the explicit covariance matrix.

use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use sketchmatch::eigenspace::{
    center, train_with, CenteringMode, FeatureVector, Route, TrainOptions,
};

struct Oracle {
    eigenvalues: Vec<f64>,
    vectors: DMatrix<f64>,
    centered: Vec<Vec<f64>>,
}

fn oracle(features: &[FeatureVector], mode: CenteringMode, threshold: f64) -> Oracle {
    let d = features[0].values.len();
    let m = features.len();
    let mean: Vec<f64> = (0..d)
        .map(|j| features.iter().map(|f| f.values[j]).sum::<f64>() / m as f64)
        .collect();
    let centered: Vec<Vec<f64>> = features
        .iter()
        .map(|f| match mode {
            CenteringMode::PerImageScalar => {
                let s = f.values.iter().sum::<f64>() / d as f64;
                f.values.iter().map(|v| v - s).collect()
            }
            CenteringMode::GlobalMeanVector => {
                f.values.iter().zip(&mean).map(|(v, mu)| v - mu).collect()
            }
        })
        .collect();
    let q = DMatrix::from_fn(d, m, |i, j| centered[j][i]);
    let c = &q * q.transpose();
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let max = eig.eigenvalues[order[0]];
    let keep: Vec<usize> = order
        .into_iter()
        .filter(|&i| eig.eigenvalues[i] > threshold * max)
        .collect();
    let vectors = DMatrix::from_fn(d, keep.len(), |i, j| eig.eigenvectors[(i, keep[j])]);
    Oracle {
        eigenvalues: keep.iter().map(|&i| eig.eigenvalues[i]).collect(),
        vectors,
        centered,
    }
}

fn projector_from_rows(rows: usize, cols: usize, at: impl Fn(usize, usize) -> f64) -> DMatrix<f64> {
    let v = DMatrix::from_fn(rows, cols, at);
    &v * v.transpose()
}

fn random_dataset(rng: &mut StdRng, m: usize, d: usize) -> Vec<FeatureVector> {
    (0..m)
        .map(|i| {
            FeatureVector::new(
                format!("s{i}"),
                (0..d).map(|_| rng.gen_range(-5.0..5.0)).collect(),
            )
        })
        .collect()
}

fn compare(features: &[FeatureVector], mode: CenteringMode, route: Route) {
    let opts = TrainOptions {
        centering: mode,
        eigen_threshold: 1e-10,
        route,
    };
    let model = train_with(features, &opts).unwrap();
    let o = oracle(features, mode, 1e-10);
    assert_eq!(model.components(), o.eigenvalues.len());
    for (a, b) in model.eigenvalues().iter().zip(&o.eigenvalues) {
        assert!((a - b).abs() <= 1e-8 * b.abs(), "eigenvalue {a} vs {b}");
    }
    let d = model.dim();
    let k = model.components();
    let p_model = projector_from_rows(d, k, |i, j| model.eigenvectors()[(i, j)]);
    let p_oracle = &o.vectors * o.vectors.transpose();
    assert!((p_model - p_oracle).norm() < 1e-6);

    // gallery coordinates, with each oracle vector's sign aligned to the model's
    for (entry, c) in model.gallery().iter().zip(&o.centered) {
        for j in 0..k {
            let v = o.vectors.column(j);
            let sign = (0..d)
                .map(|i| v[i] * model.eigenvectors()[(i, j)])
                .sum::<f64>()
                .signum();
            let want: f64 = sign * (0..d).map(|i| v[i] * c[i]).sum::<f64>();
            assert!(
                (entry.coords[j] - want).abs() < 1e-9,
                "coord {} vs {want}",
                entry.coords[j]
            );
        }
    }
}

#[test]
fn five_random_four_dim_vectors() {
    let mut rng = StdRng::seed_from_u64(7);
    let data = random_dataset(&mut rng, 5, 4);
    for mode in [
        CenteringMode::PerImageScalar,
        CenteringMode::GlobalMeanVector,
    ] {
        for route in [Route::Auto, Route::Covariance, Route::Gram] {
            compare(&data, mode, route);
        }
    }
}

#[test]
fn wide_and_tall_datasets() {
    let mut rng = StdRng::seed_from_u64(11);
    for (m, d) in [(3, 20), (10, 4), (8, 8), (12, 63)] {
        let data = random_dataset(&mut rng, m, d);
        for mode in [
            CenteringMode::PerImageScalar,
            CenteringMode::GlobalMeanVector,
        ] {
            compare(&data, mode, Route::Auto);
        }
    }
}

#[test]
fn rank_bounds() {
    let mut rng = StdRng::seed_from_u64(3);
    for _ in 0..20 {
        let m = rng.gen_range(2..9);
        let d = rng.gen_range(2..12);
        let data = random_dataset(&mut rng, m, d);
        let g = train_with(
            &data,
            &TrainOptions {
                centering: CenteringMode::GlobalMeanVector,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(g.components() <= d.min(m - 1));
        let p = train_with(&data, &TrainOptions::default()).unwrap();
        assert!(p.components() <= d.min(m));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn orthonormal_ordered_and_reconstructing(seed in any::<u64>(), m in 2usize..12, d in 2usize..16, global in any::<bool>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let data = random_dataset(&mut rng, m, d);
        let centering = if global { CenteringMode::GlobalMeanVector } else { CenteringMode::PerImageScalar };
        let model = train_with(&data, &TrainOptions { centering, ..Default::default() }).unwrap();
        let v = model.eigenvectors();
        let k = model.components();
        let vtv = v.transpose().matmul(v).unwrap();
        for i in 0..k {
            for j in 0..k {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((vtv[(i, j)] - want).abs() < 1e-9);
            }
            // largest-magnitude entry is non-negative
            let col = v.column(i);
            let big = col.iter().copied().fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
            prop_assert!(big >= 0.0);
        }
        let max = model.eigenvalues()[0];
        prop_assert!(model.eigenvalues().windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(model.eigenvalues().iter().all(|&l| l > 1e-10 * max));

        // K equals the rank of Q here, so V V^T reproduces every centered vector
        for f in &data {
            let c = center(&f.values, centering, model.global_mean()).unwrap();
            let coords = model.project(&f.values).unwrap();
            let back = v.mul_vec(&coords).unwrap();
            let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
            let err = back.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            prop_assert!(err <= 1e-6 * norm.max(1e-300));
        }
    }
}
