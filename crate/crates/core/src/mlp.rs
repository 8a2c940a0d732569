//! Feed-forward ReLU regression networks trained with Adam on mean squared
//! error.
//!
//! Layers are dense with weights stored `(out × in)`; hidden layers apply
//! ReLU and the single output unit is affine. Backpropagation is written out
//! for this fixed family; there is no general autodiff.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix, Vector};
use crate::rng::{stream_rng, Stream};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpArchitecture {
    pub input_dim: usize,
    pub hidden_layers: Vec<usize>,
}

impl MlpArchitecture {
    pub fn new(input_dim: usize, hidden_layers: Vec<usize>) -> Result<Self> {
        let arch = Self {
            input_dim,
            hidden_layers,
        };
        arch.validate()?;
        Ok(arch)
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.hidden_layers.contains(&0) {
            return Err(Error::Parameter(format!(
                "layer widths must be ≥ 1 (input {}, hidden {:?})",
                self.input_dim, self.hidden_layers
            )));
        }
        Ok(())
    }

    /// Widths from input to the scalar output, inclusive.
    pub fn widths(&self) -> Vec<usize> {
        let mut w = Vec::with_capacity(self.hidden_layers.len() + 2);
        w.push(self.input_dim);
        w.extend_from_slice(&self.hidden_layers);
        w.push(1);
        w
    }

    pub fn parameter_count(&self) -> usize {
        self.widths().windows(2).map(|p| p[1] * (p[0] + 1)).sum()
    }
}

/// One dense layer, or the matching gradient / moment buffer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    /// `(out × in)`.
    pub weights: Matrix,
    pub bias: Vector,
}

impl Dense {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            weights: Matrix::zeros(outputs, inputs),
            bias: Vector::zeros(outputs),
        }
    }

    fn same_shape(&self, other: &Dense) -> bool {
        self.weights.rows() == other.weights.rows()
            && self.weights.cols() == other.weights.cols()
            && self.bias.len() == other.bias.len()
    }

    /// `a · Wᵀ + b` for a batch `a` of shape `(batch × in)`.
    fn affine(&self, a: &[f64], batch: usize) -> Vec<f64> {
        let (outs, ins) = (self.weights.rows(), self.weights.cols());
        let mut z = Vec::with_capacity(batch * outs);
        for r in 0..batch {
            let row = &a[r * ins..(r + 1) * ins];
            for o in 0..outs {
                z.push(self.bias[o] + dot(row, self.weights.row(o)));
            }
        }
        z
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    architecture: MlpArchitecture,
    layers: Vec<Dense>,
}

/// Gradient of the loss with respect to every layer, shaped like the model.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Dense>,
}

impl Gradients {
    pub fn zeros_like(model: &MlpModel) -> Self {
        Self {
            layers: model
                .layers
                .iter()
                .map(|l| Dense::zeros(l.weights.cols(), l.weights.rows()))
                .collect(),
        }
    }

    fn matches(&self, model: &MlpModel) -> bool {
        self.layers.len() == model.layers.len()
            && self.layers.iter().zip(&model.layers).all(|(g, l)| g.same_shape(l))
    }

    /// All gradient coordinates, layer by layer, weights before biases.
    pub fn flatten(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.as_slice().iter().chain(l.bias.iter()).copied())
            .collect()
    }
}

impl MlpModel {
    /// Builds a model from explicit layers, checking that shapes chain.
    pub fn from_layers(architecture: MlpArchitecture, layers: Vec<Dense>) -> Result<Self> {
        architecture.validate()?;
        let widths = architecture.widths();
        if layers.len() != widths.len() - 1 {
            return Err(Error::Shape(format!(
                "{} layers for architecture {:?}",
                layers.len(),
                widths
            )));
        }
        for (i, (l, pair)) in layers.iter().zip(widths.windows(2)).enumerate() {
            if l.weights.cols() != pair[0] || l.weights.rows() != pair[1] || l.bias.len() != pair[1]
            {
                return Err(Error::Shape(format!(
                    "layer {i} has weights {}x{} and bias {}, expected {}x{}",
                    l.weights.rows(),
                    l.weights.cols(),
                    l.bias.len(),
                    pair[1],
                    pair[0]
                )));
            }
        }
        Ok(Self {
            architecture,
            layers,
        })
    }

    pub fn architecture(&self) -> &MlpArchitecture {
        &self.architecture
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    /// All parameters, in the same order as [`Gradients::flatten`].
    pub fn flatten(&self) -> Vec<f64> {
        Gradients {
            layers: self.layers.clone(),
        }
        .flatten()
    }

    fn check_input(&self, x: &Matrix) -> Result<()> {
        if x.cols() != self.architecture.input_dim {
            return Err(Error::Shape(format!(
                "network expects {} inputs, got {}",
                self.architecture.input_dim,
                x.cols()
            )));
        }
        Ok(())
    }

    /// Post-activation outputs of every layer, starting with the input.
    fn activations(&self, x: &Matrix) -> Vec<Vec<f64>> {
        let batch = x.rows();
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.as_slice().to_vec());
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = layer.affine(acts.last().expect("input pushed"), batch);
            if i < last {
                for v in &mut z {
                    *v = v.max(0.0);
                }
            }
            acts.push(z);
        }
        acts
    }

    pub fn forward(&self, x: &Matrix) -> Result<Vector> {
        self.check_input(x)?;
        let out = self.activations(x).pop().expect("at least one layer");
        Vector::from_vec(out).map_err(|_| Error::NonFinite("network forward pass".into()))
    }

    /// Mean squared error over the batch and its gradient by backpropagation.
    /// The ReLU derivative at exactly zero is taken as zero.
    pub fn loss_and_gradients(&self, x: &Matrix, y: &Vector) -> Result<(f64, Gradients)> {
        self.check_input(x)?;
        if x.rows() != y.len() {
            return Err(Error::Shape(format!(
                "{} input rows but {} targets",
                x.rows(),
                y.len()
            )));
        }
        let batch = x.rows();
        if batch == 0 {
            return Err(Error::EmptyData("loss over an empty batch".into()));
        }
        let acts = self.activations(x);
        let pred = acts.last().expect("output layer");
        let scale = 2.0 / batch as f64;
        let mut loss = 0.0;
        // dL/dz for the current layer, shape (batch × out).
        let mut delta: Vec<f64> = pred
            .iter()
            .zip(y.iter())
            .map(|(p, t)| {
                let r = p - t;
                loss += r * r;
                scale * r
            })
            .collect();
        loss /= batch as f64;

        let mut grads = Gradients::zeros_like(self);
        for li in (0..self.layers.len()).rev() {
            let layer = &self.layers[li];
            let (outs, ins) = (layer.weights.rows(), layer.weights.cols());
            let a_prev = &acts[li];
            let g = &mut grads.layers[li];
            let gw = g.weights.as_mut_slice();
            let gb = g.bias.as_mut_slice();
            for r in 0..batch {
                let a_row = &a_prev[r * ins..(r + 1) * ins];
                for o in 0..outs {
                    let d = delta[r * outs + o];
                    if d == 0.0 {
                        continue;
                    }
                    gb[o] += d;
                    for (w, &a) in gw[o * ins..(o + 1) * ins].iter_mut().zip(a_row) {
                        *w += d * a;
                    }
                }
            }
            if li == 0 {
                break;
            }
            let mut next = vec![0.0; batch * ins];
            for r in 0..batch {
                let out_row = &mut next[r * ins..(r + 1) * ins];
                for o in 0..outs {
                    let d = delta[r * outs + o];
                    if d == 0.0 {
                        continue;
                    }
                    for (n, &w) in out_row.iter_mut().zip(layer.weights.row(o)) {
                        *n += d * w;
                    }
                }
                // a_prev is post-ReLU, so a > 0 exactly when the pre-activation is > 0.
                for (n, &a) in out_row.iter_mut().zip(&a_prev[r * ins..(r + 1) * ins]) {
                    if a <= 0.0 {
                        *n = 0.0;
                    }
                }
            }
            delta = next;
        }
        if !loss.is_finite() || !grads.flatten().iter().all(|g| g.is_finite()) {
            return Err(Error::NonFinite("loss or gradient".into()));
        }
        Ok((loss, grads))
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string(&ModelDocument::new(self.clone()))?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let doc: ModelDocument = serde_json::from_str(&text)?;
        doc.into_model()
    }
}

pub const MODEL_FORMAT: &str = "lindec-mlp";
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Versioned on-disk form of an [`MlpModel`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format: String,
    pub version: u32,
    pub model: MlpModel,
}

impl ModelDocument {
    pub fn new(model: MlpModel) -> Self {
        Self {
            format: MODEL_FORMAT.into(),
            version: MODEL_FORMAT_VERSION,
            model,
        }
    }

    pub fn into_model(self) -> Result<MlpModel> {
        if self.format != MODEL_FORMAT || self.version != MODEL_FORMAT_VERSION {
            return Err(Error::Schema(format!(
                "unsupported model document {} v{}",
                self.format, self.version
            )));
        }
        MlpModel::from_layers(self.model.architecture, self.model.layers)
    }
}

/// He-style uniform initialization on `±sqrt(6 / fan_in)` with zero biases.
pub fn init_mlp(arch: &MlpArchitecture, seed: u64) -> Result<MlpModel> {
    arch.validate()?;
    let mut rng = stream_rng(seed, Stream::Init);
    let layers = arch
        .widths()
        .windows(2)
        .map(|pair| {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let limit = (6.0 / fan_in as f64).sqrt();
            let w: Vec<f64> = (0..fan_in * fan_out)
                .map(|_| rng.random_range(-limit..limit))
                .collect();
            Dense {
                weights: Matrix::from_vec_unchecked(fan_out, fan_in, w),
                bias: Vector::zeros(fan_out),
            }
        })
        .collect();
    MlpModel::from_layers(arch.clone(), layers)
}

pub fn forward(m: &MlpModel, x: &Matrix) -> Result<Vector> {
    m.forward(x)
}

pub fn loss_and_gradients(m: &MlpModel, x: &Matrix, y: &Vector) -> Result<(f64, Gradients)> {
    m.loss_and_gradients(x, y)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamParams {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Gradients,
    pub v: Gradients,
    pub t: u64,
    pub params: AdamParams,
}

impl AdamState {
    pub fn new(model: &MlpModel, params: AdamParams) -> Self {
        Self {
            m: Gradients::zeros_like(model),
            v: Gradients::zeros_like(model),
            t: 0,
            params,
        }
    }

    /// One bias-corrected Adam update, in place.
    pub fn step(&mut self, model: &mut MlpModel, grads: &Gradients) -> Result<()> {
        if !grads.matches(model) || !self.m.matches(model) {
            return Err(Error::Shape("gradient or moment shapes differ from the model".into()));
        }
        let AdamParams {
            lr,
            beta1,
            beta2,
            eps,
        } = self.params;
        self.t += 1;
        let c1 = 1.0 - beta1.powf(self.t as f64);
        let c2 = 1.0 - beta2.powf(self.t as f64);
        for li in 0..model.layers.len() {
            let (layer, g) = (&mut model.layers[li], &grads.layers[li]);
            let (m, v) = (&mut self.m.layers[li], &mut self.v.layers[li]);
            let update = |theta: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
                for i in 0..theta.len() {
                    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
                    v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
                    let m_hat = m[i] / c1;
                    let v_hat = v[i] / c2;
                    theta[i] -= lr * m_hat / (v_hat.sqrt() + eps);
                }
            };
            update(
                layer.weights.as_mut_slice(),
                g.weights.as_slice(),
                m.weights.as_mut_slice(),
                v.weights.as_mut_slice(),
            );
            update(
                layer.bias.as_mut_slice(),
                g.bias.as_slice(),
                m.bias.as_mut_slice(),
                v.bias.as_mut_slice(),
            );
        }
        if !model.flatten().iter().all(|p| p.is_finite()) {
            return Err(Error::NonFinite("Adam update".into()));
        }
        Ok(())
    }
}

/// Pure form of [`AdamState::step`].
pub fn adam_step(
    state: &AdamState,
    model: &MlpModel,
    grads: &Gradients,
) -> Result<(AdamState, MlpModel)> {
    let (mut s, mut m) = (state.clone(), model.clone());
    s.step(&mut m, grads)?;
    Ok((s, m))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    #[serde(flatten)]
    pub adam: AdamParams,
    pub seed: u64,
    /// Train against a standardized target and fold the scaling back into the
    /// output layer afterwards, so the returned network predicts in task units.
    pub standardize_target: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            batch_size: 32,
            adam: AdamParams::default(),
            seed: 0,
            standardize_target: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=10_000).contains(&self.epochs) {
            return Err(Error::Parameter(format!(
                "epochs must be in [1, 10000], got {}",
                self.epochs
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::Parameter("batch_size must be ≥ 1".into()));
        }
        let AdamParams {
            lr,
            beta1,
            beta2,
            eps,
        } = self.adam;
        if !(lr > 0.0 && lr.is_finite())
            || !(0.0..1.0).contains(&beta1)
            || !(0.0..1.0).contains(&beta2)
            || !(eps > 0.0 && eps.is_finite())
        {
            return Err(Error::Parameter(format!("invalid Adam hyperparameters {:?}", self.adam)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedMlp {
    pub model: MlpModel,
    /// Mean minibatch loss per epoch, in squared task units.
    pub epoch_losses: Vec<f64>,
}

impl TrainedMlp {
    pub fn final_loss(&self) -> f64 {
        self.epoch_losses.last().copied().unwrap_or(f64::NAN)
    }
}

/// Mini-batch Adam on MSE with a seeded per-epoch shuffle. Returns the model
/// after the final epoch.
pub fn train(arch: &MlpArchitecture, data: &Dataset, cfg: &TrainConfig) -> Result<TrainedMlp> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyData("training set has no rows".into()));
    }
    if arch.input_dim != data.dim() {
        return Err(Error::Shape(format!(
            "architecture expects {} inputs, training set has {}",
            arch.input_dim,
            data.dim()
        )));
    }
    let n = data.len();
    let batch_size = if cfg.batch_size > n {
        log::warn!("batch_size {} exceeds {n} training rows; clamping", cfg.batch_size);
        n
    } else {
        cfg.batch_size
    };

    let (y_mean, y_std) = if cfg.standardize_target {
        let mean = data.target().mean();
        let var = data.target().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        let std = var.sqrt();
        (mean, if std > 1e-12 { std } else { 1.0 })
    } else {
        (0.0, 1.0)
    };
    let y: Vec<f64> = data.target().iter().map(|v| (v - y_mean) / y_std).collect();
    let x = data.features();
    let d = x.cols();

    let mut model = init_mlp(arch, cfg.seed)?;
    let mut adam = AdamState::new(&model, cfg.adam);
    let mut rng = stream_rng(cfg.seed, Stream::Shuffle);
    let mut order: Vec<usize> = (0..n).collect();
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    let mut xb = Vec::with_capacity(batch_size * d);
    let mut yb = Vec::with_capacity(batch_size);

    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(batch_size) {
            xb.clear();
            yb.clear();
            for &i in chunk {
                xb.extend_from_slice(x.row(i));
                yb.push(y[i]);
            }
            let xm = Matrix::from_vec_unchecked(chunk.len(), d, std::mem::take(&mut xb));
            let ym = Vector::from_vec_unchecked(std::mem::take(&mut yb));
            let (loss, grads) = model.loss_and_gradients(&xm, &ym)?;
            adam.step(&mut model, &grads)?;
            total += loss * chunk.len() as f64;
            xb = xm.into_vec();
            yb = ym.into_vec();
        }
        epoch_losses.push(total / n as f64 * y_std * y_std);
    }

    if cfg.standardize_target {
        let out = model.layers.last_mut().expect("output layer");
        for w in out.weights.as_mut_slice() {
            *w *= y_std;
        }
        let b = out.bias.as_mut_slice();
        b[0] = b[0] * y_std + y_mean;
    }
    Ok(TrainedMlp {
        model,
        epoch_losses,
    })
}
