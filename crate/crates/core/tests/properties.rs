mod common;

use common::{gd_least_squares, indexed_dataset, random_small_mlp, rng};
use lindec::dataset::{quantile_shift_split, Dataset};
use lindec::linalg::{Matrix, Vector};
use lindec::metrics::{lambda_score, r_squared};
use lindec::mlp::{Dense, MlpArchitecture, MlpModel};
use lindec::surrogate::{fit_surrogate, ols_fit};
use proptest::prelude::*;
use rand::Rng;

fn affine_net(input: usize) -> MlpModel {
    // Hidden units carry a large positive bias, so they never switch off on
    // inputs in [-10, 10]: the network is affine there.
    let arch = MlpArchitecture::new(input, vec![3]).unwrap();
    let w1: Vec<Vec<f64>> = (0..3)
        .map(|o| (0..input).map(|i| 0.1 * (o as f64 + 1.0) - 0.05 * i as f64).collect())
        .collect();
    MlpModel::from_layers(
        arch,
        vec![
            Dense {
                weights: Matrix::from_rows(&w1).unwrap(),
                bias: Vector::from_vec(vec![50.0; 3]).unwrap(),
            },
            Dense {
                weights: Matrix::from_rows(&[vec![1.5, -0.7, 0.2]]).unwrap(),
                bias: Vector::from_vec(vec![-3.0]).unwrap(),
            },
        ],
    )
    .unwrap()
}

fn features(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut r = rng(seed);
    Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| r.random_range(-2.0..2.0)).collect())
        .unwrap()
}

fn dataset(x: Matrix) -> Dataset {
    let names = (0..x.cols()).map(|i| format!("x{i}")).collect();
    let n = x.rows();
    Dataset::new(x, Vector::zeros(n), names, "y").unwrap()
}

#[test]
fn affine_network_is_contained() {
    let net = affine_net(3);
    let train = dataset(features(50, 3, 1));
    let g = fit_surrogate(&net, &train).unwrap();
    let eval = features(40, 3, 2);
    let f = net.forward(&eval).unwrap();
    let gp = g.predict(&eval).unwrap();
    for (a, b) in f.iter().zip(gp.iter()) {
        assert!((a - b).abs() < 1e-6);
    }
    assert!((lambda_score(&f, &gp).unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn ols_equivariance_under_target_affine_map() {
    let x = features(60, 4, 5);
    let net = random_small_net(4, 9);
    let f = net.forward(&x).unwrap();
    let base = ols_fit(&x, &f).unwrap();
    let (a, c) = (-2.5, 7.0);
    let mapped = Vector::from_vec(f.iter().map(|v| a * v + c).collect()).unwrap();
    let m = ols_fit(&x, &mapped).unwrap();
    for (w1, w0) in m.weights.iter().zip(base.weights.iter()) {
        assert!((w1 - a * w0).abs() < 1e-8);
    }
    assert!((m.intercept - (a * base.intercept + c)).abs() < 1e-8);
}

fn random_small_net(input: usize, seed: u64) -> MlpModel {
    let arch = MlpArchitecture::new(input, vec![6, 4]).unwrap();
    lindec::init_mlp(&arch, seed).unwrap()
}

#[test]
fn ols_matches_gradient_descent() {
    let mut r = rng(77);
    for _ in 0..25 {
        let cols = r.random_range(1..=4);
        let rows = r.random_range(3 * (cols + 1)..40);
        let x = features(rows, cols, r.random());
        let y = Vector::from_vec((0..rows).map(|_| r.random_range(-5.0..5.0)).collect()).unwrap();
        let m = ols_fit(&x, &y).unwrap();
        let gd = gd_least_squares(&x.with_intercept_column(), &y);
        let mut ours = m.weights.as_slice().to_vec();
        ours.push(m.intercept);
        let scale = gd.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
        let diff = ours.iter().zip(&gd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(diff / scale < 1e-6, "{ours:?} vs {gd:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn surrogate_is_in_sample_optimal(seed in 0u64..10_000) {
        let mut r = rng(seed);
        let net = random_small_mlp(&mut r);
        let d = net.architecture().input_dim;
        let train = dataset(features(30, d, seed));
        let f = net.forward(train.features()).unwrap();
        prop_assume!(lindec::metrics::population_variance(&f) > 1e-9);
        let g = fit_surrogate(&net, &train).unwrap();
        let mse = |w: &[f64], b: f64| {
            let m = lindec::LinearModel::new(Vector::from_vec(w.to_vec()).unwrap(), b).unwrap();
            let p = m.predict(train.features()).unwrap();
            p.iter().zip(f.iter()).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / 30.0
        };
        let base = mse(g.weights.as_slice(), g.intercept);
        for i in 0..=d {
            for eps in [1e-3, -1e-3] {
                let mut w = g.weights.as_slice().to_vec();
                let mut b = g.intercept;
                if i < d { w[i] += eps } else { b += eps }
                prop_assert!(mse(&w, b) >= base - 1e-12);
            }
        }
        // The mean predictor is affine, so in-sample λ cannot be negative.
        let gp = g.predict(train.features()).unwrap();
        let lambda = lambda_score(&f, &gp).unwrap();
        prop_assert!((-1e-9..=1.0 + 1e-9).contains(&lambda));
    }

    #[test]
    fn lambda_is_invariant_to_affine_output_maps(seed in 0u64..10_000, a in 0.1f64..5.0, neg in any::<bool>(), c in -10.0f64..10.0) {
        let a = if neg { -a } else { a };
        let net = random_small_net(3, seed);
        let train = features(40, 3, seed + 1);
        let eval = features(30, 3, seed + 2);
        let f_train = net.forward(&train).unwrap();
        let f_eval = net.forward(&eval).unwrap();
        prop_assume!(lindec::metrics::population_variance(&f_eval) > 1e-6);
        let lam = |map: &dyn Fn(f64) -> f64| {
            let ft = Vector::from_vec(f_train.iter().map(|v| map(*v)).collect()).unwrap();
            let fe = Vector::from_vec(f_eval.iter().map(|v| map(*v)).collect()).unwrap();
            let g = ols_fit(&train, &ft).unwrap();
            lambda_score(&fe, &g.predict(&eval).unwrap()).unwrap()
        };
        let l0 = lam(&|v| v);
        let l1 = lam(&|v| a * v + c);
        prop_assert!((l0 - l1).abs() < 1e-8, "{l0} vs {l1}");
    }

    #[test]
    fn r_squared_reference_points(ys in prop::collection::vec(-100.0f64..100.0, 2..50)) {
        let y = Vector::from_vec(ys.clone()).unwrap();
        prop_assume!(lindec::metrics::population_variance(&y) > 1e-6);
        let mean = Vector::from_vec(vec![y.mean(); ys.len()]).unwrap();
        prop_assert!((r_squared(&y, &y).unwrap() - 1.0).abs() <= 1e-12);
        prop_assert!(r_squared(&y, &mean).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn shift_split_partitions_and_orders(
        vals in prop::collection::vec(0u32..40, 10..120),
        lo in 0.05f64..0.3,
        width in 0.2f64..0.6,
        seed in any::<u64>(),
    ) {
        let values: Vec<f64> = vals.iter().map(|v| *v as f64).collect();
        let n = values.len();
        let d = indexed_dataset(values.clone());
        match quantile_shift_split(&d, "v", lo, lo + width, 0.2, seed) {
            Ok(s) => {
                let mut rows: Vec<usize> = [&s.train, &s.iid_test, &s.tail_low, &s.tail_high]
                    .iter()
                    .flat_map(|p| p.target().iter().map(|v| *v as usize).collect::<Vec<_>>())
                    .collect();
                rows.sort();
                prop_assert_eq!(rows, (0..n).collect::<Vec<_>>());
                let mid: Vec<f64> = s.train.features().as_slice().iter()
                    .chain(s.iid_test.features().as_slice()).copied().collect();
                for &v in s.tail_low.features().as_slice() {
                    prop_assert!(mid.iter().all(|m| v < *m));
                }
                for &v in s.tail_high.features().as_slice() {
                    prop_assert!(mid.iter().all(|m| v > *m));
                }
            }
            Err(lindec::Error::Parameter(_)) => {
                // Only allowed when ties leave a tail empty.
                let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
                let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let k_lo = ((lo * n as f64) - 1e-9).ceil() as usize;
                let mut sorted = values.clone();
                sorted.sort_by(f64::total_cmp);
                prop_assert!(k_lo == 0 || sorted[k_lo] == min || sorted.iter().rev().take_while(|v| **v == max).count() >= n - ((lo + width) * n as f64 - 1e-9).ceil() as usize);
            }
            Err(e) => prop_assert!(false, "{e}"),
        }
    }
}
