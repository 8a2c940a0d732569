mod common;

use common::{gradient_check, naive_forward, random_batch, random_small_mlp, rng};
use lindec::linalg::Matrix;
use lindec::mlp::{Dense, MlpArchitecture, MlpModel};
use lindec::Vector;

#[test]
fn forward_agrees_with_scalar_oracle() {
    let mut r = rng(17);
    for _ in 0..10 {
        let m = random_small_mlp(&mut r);
        let (x, _) = random_batch(&mut r, 6, m.architecture().input_dim);
        let fast = m.forward(&x).unwrap();
        for row in 0..x.rows() {
            let (slow, _) = naive_forward(&m, x.row(row));
            assert!((fast[row] - slow).abs() < 1e-12);
        }
    }
}

#[test]
fn backprop_matches_central_differences() {
    let mut r = rng(3);
    for _ in 0..10 {
        let m = random_small_mlp(&mut r);
        let (x, y) = random_batch(&mut r, 8, m.architecture().input_dim);
        let check = gradient_check(&m, &x, &y, 1e-5);
        assert!(check.checked > 0);
        assert!(check.max_rel_err < 1e-4, "{check:?}");
    }
}

#[test]
fn single_layer_weight_gradient_is_two_residual_x() {
    // One hidden unit kept active; output gradient is 2(ŷ − y)·h.
    let arch = MlpArchitecture::new(2, vec![1]).unwrap();
    let m = MlpModel::from_layers(
        arch,
        vec![
            Dense {
                weights: Matrix::from_rows(&[vec![1.0, 1.0]]).unwrap(),
                bias: Vector::from_vec(vec![5.0]).unwrap(),
            },
            Dense {
                weights: Matrix::from_rows(&[vec![0.3]]).unwrap(),
                bias: Vector::from_vec(vec![0.0]).unwrap(),
            },
        ],
    )
    .unwrap();
    let x = Matrix::from_rows(&[vec![0.5, -1.0]]).unwrap();
    let h = 0.5 - 1.0 + 5.0;
    let y = 2.0;
    let (_, g) = m
        .loss_and_gradients(&x, &Vector::from_vec(vec![y]).unwrap())
        .unwrap();
    let resid = 0.3 * h - y;
    assert!((g.layers[1].weights.get(0, 0) - 2.0 * resid * h).abs() < 1e-12);
    // Chain rule into the first layer: 2(ŷ − y)·w₂·xᵢ.
    assert!((g.layers[0].weights.get(0, 0) - 2.0 * resid * 0.3 * 0.5).abs() < 1e-12);
    assert!((g.layers[0].weights.get(0, 1) - -(2.0 * resid * 0.3)).abs() < 1e-12);
}
