//! Independent oracles shared by the integration tests. Nothing here calls
//! the library's forward pass, backprop, or solver.
#![allow(dead_code)]

use lindec::dataset::Dataset;
use lindec::linalg::{Matrix, Vector};
use lindec::mlp::{MlpArchitecture, MlpModel};
use lindec::ExperimentConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Scalar per-sample forward pass. Returns the output and every hidden
/// pre-activation.
pub fn naive_forward(model: &MlpModel, input: &[f64]) -> (f64, Vec<f64>) {
    let layers = model.layers();
    let mut a = input.to_vec();
    let mut pre = Vec::new();
    for (li, layer) in layers.iter().enumerate() {
        let w = &layer.weights;
        let mut z = vec![0.0; w.rows()];
        for (o, zo) in z.iter_mut().enumerate() {
            let mut s = layer.bias[o];
            for (i, ai) in a.iter().enumerate() {
                s += w.get(o, i) * ai;
            }
            *zo = s;
        }
        if li + 1 < layers.len() {
            pre.extend_from_slice(&z);
            a = z.into_iter().map(|v| if v > 0.0 { v } else { 0.0 }).collect();
        } else {
            a = z;
        }
    }
    (a[0], pre)
}

pub fn naive_loss(model: &MlpModel, x: &Matrix, y: &Vector) -> (f64, Vec<f64>) {
    let mut loss = 0.0;
    let mut pre = Vec::new();
    for r in 0..x.rows() {
        let (out, p) = naive_forward(model, x.row(r));
        loss += (out - y[r]).powi(2);
        pre.extend(p);
    }
    (loss / x.rows() as f64, pre)
}

pub fn perturbed(model: &MlpModel, coord: usize, delta: f64) -> MlpModel {
    let mut m = model.clone();
    let mut k = coord;
    for layer in m.layers_mut() {
        let nw = layer.weights.rows() * layer.weights.cols();
        let nb = layer.bias.len();
        if k < nw {
            let (r, c) = (k / layer.weights.cols(), k % layer.weights.cols());
            let mut data = layer.weights.as_slice().to_vec();
            data[r * layer.weights.cols() + c] += delta;
            layer.weights =
                Matrix::from_vec(layer.weights.rows(), layer.weights.cols(), data).unwrap();
            return m;
        }
        k -= nw;
        if k < nb {
            let mut b = layer.bias.as_slice().to_vec();
            b[k] += delta;
            layer.bias = Vector::from_vec(b).unwrap();
            return m;
        }
        k -= nb;
    }
    panic!("coordinate {coord} out of range");
}

/// Denominator floor for relative gradient error.
pub const GRAD_REL_FLOOR: f64 = 1e-6;
pub const KINK_MARGIN: f64 = 1e-6;

#[derive(Debug, Default)]
pub struct GradCheck {
    pub checked: usize,
    pub skipped_kinks: usize,
    pub max_rel_err: f64,
}

/// Compares analytic gradients with central differences of step `h`.
/// Coordinates whose ±h perturbation moves any hidden pre-activation across
/// or within `KINK_MARGIN` of zero are skipped.
pub fn gradient_check(model: &MlpModel, x: &Matrix, y: &Vector, h: f64) -> GradCheck {
    let (_, grads) = model.loss_and_gradients(x, y).unwrap();
    let analytic = grads.flatten();
    let mut out = GradCheck::default();
    for (coord, &a) in analytic.iter().enumerate() {
        let (lp, pre_p) = naive_loss(&perturbed(model, coord, h), x, y);
        let (lm, pre_m) = naive_loss(&perturbed(model, coord, -h), x, y);
        let near_kink = pre_p
            .iter()
            .zip(&pre_m)
            .any(|(p, m)| p.abs() < KINK_MARGIN || m.abs() < KINK_MARGIN || (p > &0.0) != (m > &0.0));
        if near_kink {
            out.skipped_kinks += 1;
            continue;
        }
        let numeric = (lp - lm) / (2.0 * h);
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(GRAD_REL_FLOOR);
        out.max_rel_err = out.max_rel_err.max(rel);
        out.checked += 1;
    }
    out
}

/// Random network with two or three weight layers and widths ≤ 8.
pub fn random_small_mlp(rng: &mut ChaCha8Rng) -> MlpModel {
    let input = rng.random_range(1..=4);
    let hidden_count = rng.random_range(1..=2);
    let hidden: Vec<usize> = (0..hidden_count).map(|_| rng.random_range(1..=8)).collect();
    let arch = MlpArchitecture::new(input, hidden).unwrap();
    let mut m = lindec::init_mlp(&arch, rng.random()).unwrap();
    for layer in m.layers_mut() {
        let b: Vec<f64> = (0..layer.bias.len()).map(|_| rng.random_range(-0.5..0.5)).collect();
        layer.bias = Vector::from_vec(b).unwrap();
    }
    m
}

pub fn random_batch(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> (Matrix, Vector) {
    let x: Vec<f64> = (0..rows * cols).map(|_| rng.random_range(-2.0..2.0)).collect();
    let y: Vec<f64> = (0..rows).map(|_| rng.random_range(-3.0..3.0)).collect();
    (
        Matrix::from_vec(rows, cols, x).unwrap(),
        Vector::from_vec(y).unwrap(),
    )
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Gradient descent on ‖Xβ − y‖² with step 1/L, L estimated by power
/// iteration on XᵀX. Returns β after convergence.
pub fn gd_least_squares(x: &Matrix, y: &Vector) -> Vec<f64> {
    let (n, p) = (x.rows(), x.cols());
    let xtx = |v: &[f64]| -> Vec<f64> {
        let xv: Vec<f64> = (0..n)
            .map(|r| x.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect();
        (0..p).map(|c| (0..n).map(|r| x.get(r, c) * xv[r]).sum()).collect()
    };
    let mut v = vec![1.0; p];
    let mut lmax = 0.0;
    for _ in 0..200 {
        let w = xtx(&v);
        let norm = w.iter().map(|a| a * a).sum::<f64>().sqrt();
        lmax = norm / v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v = w.iter().map(|a| a / norm).collect();
    }
    let step = 1.0 / (lmax * 1.01);
    let xty: Vec<f64> = (0..p).map(|c| (0..n).map(|r| x.get(r, c) * y[r]).sum()).collect();
    let mut beta = vec![0.0; p];
    for _ in 0..2_000_000 {
        let g: Vec<f64> = xtx(&beta).iter().zip(&xty).map(|(a, b)| a - b).collect();
        let gnorm = g.iter().map(|a| a * a).sum::<f64>().sqrt();
        for (b, gi) in beta.iter_mut().zip(&g) {
            *b -= step * gi;
        }
        if gnorm < 1e-13 * (1.0 + xty.iter().map(|a| a * a).sum::<f64>().sqrt()) {
            break;
        }
    }
    beta
}

/// Small, fast synthetic config for pipeline tests.
pub fn small_synthetic_config(seeds: &[u64]) -> ExperimentConfig {
    let text = format!(
        r#"{{
            "dataset": {{"kind": "synthetic", "n": 300, "noise_std": 0.2, "x_min": -4, "x_max": 4, "seed": 1}},
            "architecture": {{"hidden_layers": [8]}},
            "training": {{"epochs": 15, "batch_size": 32}},
            "split": {{"kind": "plain", "test_fraction": 0.2}},
            "seeds": {seeds:?}
        }}"#
    );
    ExperimentConfig::from_json_str(&text).unwrap()
}

/// Two-feature regression with a nonlinear target, written as CSV.
pub fn write_shift_csv(path: &std::path::Path, n: usize, seed: u64) {
    let mut r = rng(seed);
    let mut text = String::from("income,age,value\n");
    for _ in 0..n {
        let income: f64 = r.random_range(0.5..10.0);
        let age: f64 = r.random_range(1.0..50.0);
        let value = (income * 0.6).sin() + 0.3 * income + 0.01 * age + r.random_range(-0.1..0.1);
        text.push_str(&format!("{income},{age},{value}\n"));
    }
    std::fs::write(path, text).unwrap();
}

/// Dataset whose target is the row index, for partition checks.
pub fn indexed_dataset(values: Vec<f64>) -> Dataset {
    let n = values.len();
    Dataset::new(
        Matrix::from_vec(n, 1, values).unwrap(),
        Vector::from_vec((0..n).map(|i| i as f64).collect()).unwrap(),
        vec!["v".into()],
        "row",
    )
    .unwrap()
}
