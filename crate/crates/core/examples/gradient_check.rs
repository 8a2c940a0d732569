//! Compares backpropagated gradients with central finite differences on a
//! small random network. Coordinates near a ReLU kink can disagree; this
//! network keeps its pre-activations away from zero.

use lindec::linalg::{Matrix, Vector};
use lindec::{init_mlp, MlpArchitecture, MlpModel};

fn loss(m: &MlpModel, x: &Matrix, y: &Vector) -> f64 {
    let p = m.forward(x).unwrap();
    p.iter().zip(y.iter()).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / y.len() as f64
}

fn main() -> lindec::Result<()> {
    let arch = MlpArchitecture::new(3, vec![5, 4])?;
    let mut model = init_mlp(&arch, 42)?;
    // Nonzero biases keep pre-activations off the ReLU kink at 0.
    for layer in model.layers_mut() {
        let n = layer.bias.len();
        layer.bias = Vector::from_vec((0..n).map(|i| 0.05 + 0.1 * i as f64).collect())?;
    }
    let x = Matrix::from_vec(6, 3, (0..18).map(|i| ((i * 13) % 7) as f64 / 3.0 - 1.0).collect())?;
    let y = Vector::from_vec(vec![0.5, -1.0, 2.0, 0.0, 1.5, -0.5])?;
    let (_, grads) = model.loss_and_gradients(&x, &y)?;

    let h = 1e-5;
    let mut worst = 0.0f64;
    for (li, g) in grads.layers.iter().enumerate() {
        for k in 0..g.weights.as_slice().len() {
            let bump = |d: f64| {
                let mut m = model.clone();
                let w = &mut m.layers_mut()[li].weights;
                let mut data = w.as_slice().to_vec();
                data[k] += d;
                *w = Matrix::from_vec(w.rows(), w.cols(), data).unwrap();
                loss(&m, &x, &y)
            };
            let numeric = (bump(h) - bump(-h)) / (2.0 * h);
            let analytic = g.weights.as_slice()[k];
            let rel = (numeric - analytic).abs() / numeric.abs().max(analytic.abs()).max(1e-6);
            worst = worst.max(rel);
        }
    }
    println!("{} parameters, max relative error {worst:.2e}", arch.parameter_count());
    Ok(())
}
