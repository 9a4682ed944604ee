use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::afzoo::ActivationSpec;
use crate::error::{Error, Result};
use crate::net::Matrix;

/// Shape and activation of one dense layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub in_dim: usize,
    pub out_dim: usize,
    pub activation: ActivationSpec,
    pub trainable_af: bool,
}

/// `a_out = f(W a_in + b)` with `W` stored as `(out_dim x in_dim)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub activation: ActivationSpec,
}

impl DenseLayer {
    pub fn spec(&self) -> LayerSpec {
        LayerSpec {
            in_dim: self.weights.cols(),
            out_dim: self.weights.rows(),
            activation: self.activation,
            trainable_af: self.activation.is_trainable(),
        }
    }
}

/// Architecture of a classifier MLP: hidden layers share one activation, the
/// output layer is linear.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Architecture {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub n_classes: usize,
    pub hidden_activation: ActivationSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    layers: Vec<DenseLayer>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradients {
    pub weights: Matrix,
    pub bias: Vec<f64>,
    /// Present only for layers with a trainable activation.
    pub af_param: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGradients>,
}

impl Gradients {
    /// Flattened in the same order as [`Network::params`].
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.extend_from_slice(l.weights.data());
            out.extend_from_slice(&l.bias);
            out.extend(l.af_param);
        }
        out
    }
}

/// Cached per-layer values from a forward pass.
struct Trace {
    /// Layer inputs: `inputs[0]` is the batch, `inputs[k]` the output of layer `k - 1`.
    inputs: Vec<Matrix>,
    pre_activations: Vec<Matrix>,
    logits: Matrix,
}

impl Network {
    pub fn new(layers: Vec<DenseLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Shape("network needs at least one layer".into()));
        }
        for (k, layer) in layers.iter().enumerate() {
            if layer.bias.len() != layer.weights.rows() {
                return Err(Error::Shape(format!(
                    "layer {k}: bias has {} entries for {} outputs",
                    layer.bias.len(),
                    layer.weights.rows()
                )));
            }
            if layer.weights.rows() == 0 || layer.weights.cols() == 0 {
                return Err(Error::Shape(format!("layer {k} has an empty weight matrix")));
            }
            layer.activation.validate()?;
            if let Some(next) = layers.get(k + 1) {
                if next.weights.cols() != layer.weights.rows() {
                    return Err(Error::Shape(format!(
                        "layer {k} outputs {} values but layer {} expects {}",
                        layer.weights.rows(),
                        k + 1,
                        next.weights.cols()
                    )));
                }
            }
        }
        let last = layers.last().expect("non-empty");
        if last.activation != ActivationSpec::Identity {
            return Err(Error::Parameter(format!(
                "output layer must be identity (logits), got {}",
                last.activation
            )));
        }
        Ok(Network { layers })
    }

    /// He initialisation: `W ~ N(0, 2 / in_dim)`, zero biases.
    pub fn init<R: Rng + ?Sized>(arch: &Architecture, rng: &mut R) -> Result<Self> {
        if arch.input_dim == 0 || arch.n_classes == 0 || arch.hidden.contains(&0) {
            return Err(Error::Shape(format!("invalid architecture {arch:?}")));
        }
        let mut dims = vec![arch.input_dim];
        dims.extend_from_slice(&arch.hidden);
        dims.push(arch.n_classes);

        let n_layers = dims.len() - 1;
        let mut layers = Vec::with_capacity(n_layers);
        for (k, pair) in dims.windows(2).enumerate() {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let normal = Normal::new(0.0, (2.0 / fan_in as f64).sqrt()).expect("positive std");
            let data = (0..fan_in * fan_out).map(|_| normal.sample(rng)).collect();
            let activation = if k + 1 == n_layers {
                ActivationSpec::Identity
            } else {
                arch.hidden_activation
            };
            layers.push(DenseLayer {
                weights: Matrix::new(fan_out, fan_in, data)?,
                bias: vec![0.0; fan_out],
                activation,
            });
        }
        Network::new(layers)
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn layer_specs(&self) -> Vec<LayerSpec> {
        self.layers.iter().map(DenseLayer::spec).collect()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].weights.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("non-empty").weights.rows()
    }

    /// Current trainable activation parameter of each layer.
    pub fn af_params(&self) -> Vec<Option<f64>> {
        self.layers.iter().map(|l| l.activation.trainable_param()).collect()
    }

    fn check_batch(&self, batch: &Matrix) -> Result<()> {
        if batch.cols() != self.input_dim() {
            return Err(Error::Shape(format!(
                "batch has {} features, network expects {}",
                batch.cols(),
                self.input_dim()
            )));
        }
        Ok(())
    }

    fn trace(&self, batch: &Matrix) -> Result<Trace> {
        self.check_batch(batch)?;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre_activations = Vec::with_capacity(self.layers.len());
        let mut current = batch.clone();
        for layer in &self.layers {
            let z = current.mul_transposed_add(&layer.weights, &layer.bias)?;
            let mut a = z.clone();
            let af = layer.activation;
            a.data_mut().iter_mut().for_each(|v| *v = af.apply(*v));
            inputs.push(std::mem::replace(&mut current, a));
            pre_activations.push(z);
        }
        Ok(Trace {
            inputs,
            pre_activations,
            logits: current,
        })
    }

    /// Logits for a `(batch x input_dim)` matrix.
    pub fn forward(&self, batch: &Matrix) -> Result<Matrix> {
        self.check_batch(batch)?;
        let mut current = batch.clone();
        for layer in &self.layers {
            let mut z = current.mul_transposed_add(&layer.weights, &layer.bias)?;
            let af = layer.activation;
            z.data_mut().iter_mut().for_each(|v| *v = af.apply(*v));
            current = z;
        }
        Ok(current)
    }

    pub fn predict(&self, batch: &Matrix) -> Result<Vec<usize>> {
        let logits = self.forward(batch)?;
        Ok(logits.iter_rows().map(argmax).collect())
    }

    /// Mean softmax cross-entropy.
    pub fn loss(&self, batch: &Matrix, labels: &[usize]) -> Result<f64> {
        let logits = self.forward(batch)?;
        let (loss, _) = softmax_cross_entropy(&logits, labels)?;
        Ok(loss)
    }

    /// Mean softmax cross-entropy and its gradient with respect to every
    /// weight, bias, and trainable activation parameter.
    pub fn loss_and_grads(&self, batch: &Matrix, labels: &[usize]) -> Result<(f64, Gradients)> {
        let trace = self.trace(batch)?;
        let (loss, mut upstream) = softmax_cross_entropy(&trace.logits, labels)?;

        let mut grads = Vec::with_capacity(self.layers.len());
        for (k, layer) in self.layers.iter().enumerate().rev() {
            let z = &trace.pre_activations[k];
            let input = &trace.inputs[k];
            let af = layer.activation;

            // upstream holds dL/da; turn it into dL/dz in place.
            let mut af_grad = 0.0;
            for (g, &zv) in upstream.data_mut().iter_mut().zip(z.data()) {
                af_grad += *g * af.param_grad(zv);
                *g *= af.grad(zv);
            }
            let dz = upstream;

            let (out_dim, in_dim) = (layer.weights.rows(), layer.weights.cols());
            let mut dw = Matrix::zeros(out_dim, in_dim);
            let mut db = vec![0.0; out_dim];
            let mut d_input = Matrix::zeros(dz.rows(), in_dim);
            for r in 0..dz.rows() {
                let x = input.row(r);
                for (o, &g) in dz.row(r).iter().enumerate() {
                    if g == 0.0 {
                        continue;
                    }
                    db[o] += g;
                    dw.row_mut(o).iter_mut().zip(x).for_each(|(w, xv)| *w += g * xv);
                    d_input
                        .row_mut(r)
                        .iter_mut()
                        .zip(layer.weights.row(o))
                        .for_each(|(d, wv)| *d += g * wv);
                }
            }

            grads.push(LayerGradients {
                weights: dw,
                bias: db,
                af_param: af.is_trainable().then_some(af_grad),
            });
            upstream = d_input;
        }
        grads.reverse();
        Ok((loss, Gradients { layers: grads }))
    }

    pub fn num_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.data().len() + l.bias.len() + usize::from(l.activation.is_trainable()))
            .sum()
    }

    /// All parameters, layer by layer: weights (row-major), biases, trainable AF parameter.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for l in &self.layers {
            out.extend_from_slice(l.weights.data());
            out.extend_from_slice(&l.bias);
            out.extend(l.activation.trainable_param());
        }
        out
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.num_params() {
            return Err(Error::Shape(format!(
                "expected {} parameters, got {}",
                self.num_params(),
                params.len()
            )));
        }
        let mut rest = params;
        for l in &mut self.layers {
            let (w, tail) = rest.split_at(l.weights.data().len());
            l.weights.data_mut().copy_from_slice(w);
            let (b, tail) = tail.split_at(l.bias.len());
            l.bias.copy_from_slice(b);
            rest = tail;
            if l.activation.is_trainable() {
                l.activation = l.activation.with_trainable_param(rest[0]);
                rest = &rest[1..];
            }
        }
        Ok(())
    }

    /// Projects trainable activation parameters back onto their admissible
    /// set (PReLU slopes are clamped at zero).
    pub fn project_af_params(&mut self) {
        for l in &mut self.layers {
            if let ActivationSpec::PRelu { alpha } = l.activation {
                l.activation = ActivationSpec::PRelu { alpha: alpha.max(0.0) };
            }
        }
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        Checkpoint {
            layers: self
                .layers
                .iter()
                .map(|l| CheckpointLayer {
                    in_dim: l.weights.cols(),
                    out_dim: l.weights.rows(),
                    activation: l.activation.to_string(),
                    weights: l.weights.data().to_vec(),
                    bias: l.bias.clone(),
                    af_param: l.activation.trainable_param(),
                })
                .collect(),
        }
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        let layers = ckpt
            .layers
            .iter()
            .map(|l| {
                let mut activation: ActivationSpec = l.activation.parse()?;
                if let Some(p) = l.af_param {
                    activation = activation.with_trainable_param(p);
                }
                Ok(DenseLayer {
                    weights: Matrix::new(l.out_dim, l.in_dim, l.weights.clone())?,
                    bias: l.bias.clone(),
                    activation,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Network::new(layers)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_checkpoint()).expect("checkpoint serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Network::from_checkpoint(&serde_json::from_str(s)?)
    }
}

/// JSON checkpoint: dimensions, activation descriptors, row-major weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub layers: Vec<CheckpointLayer>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointLayer {
    pub in_dim: usize,
    pub out_dim: usize,
    pub activation: String,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub af_param: Option<f64>,
}

pub(crate) fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Row-wise softmax probabilities with the row max subtracted.
pub fn softmax(logits: &Matrix) -> Matrix {
    let mut out = logits.clone();
    for r in 0..out.rows() {
        let row = out.row_mut(r);
        let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - m).exp();
            sum += *v;
        }
        row.iter_mut().for_each(|v| *v /= sum);
    }
    out
}

/// Mean cross-entropy and `dL/dlogits = (softmax - onehot) / n`.
pub fn softmax_cross_entropy(logits: &Matrix, labels: &[usize]) -> Result<(f64, Matrix)> {
    let n = logits.rows();
    if n == 0 {
        return Err(Error::Data("empty batch".into()));
    }
    if labels.len() != n {
        return Err(Error::Shape(format!("{} labels for {n} rows", labels.len())));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= logits.cols()) {
        return Err(Error::Data(format!(
            "label {bad} out of range for {} classes",
            logits.cols()
        )));
    }

    let mut grad = Matrix::zeros(n, logits.cols());
    let mut total = 0.0;
    let scale = 1.0 / n as f64;
    for (r, &label) in labels.iter().enumerate() {
        let z = logits.row(r);
        let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
        total += lse - z[label];
        let g = grad.row_mut(r);
        for (gv, zv) in g.iter_mut().zip(z) {
            *gv = (zv - lse).exp() * scale;
        }
        g[label] -= scale;
    }
    Ok((total * scale, grad))
}

/// Largest relative error between analytic gradients and central differences,
/// `|g_a - g_n| / max(|g_a|, |g_n|, 1e-8)`, over every parameter.
pub fn gradient_check(net: &Network, batch: &Matrix, labels: &[usize], h: f64) -> Result<f64> {
    if h.is_nan() || h <= 0.0 {
        return Err(Error::Parameter(format!("step h must be > 0, got {h}")));
    }
    let (_, grads) = net.loss_and_grads(batch, labels)?;
    let analytic = grads.flatten();
    let base = net.params();
    let mut probe = net.clone();
    let mut worst = 0.0f64;
    for (i, &ga) in analytic.iter().enumerate() {
        let mut p = base.clone();
        p[i] = base[i] + h;
        probe.set_params(&p)?;
        let up = probe.loss(batch, labels)?;
        p[i] = base[i] - h;
        probe.set_params(&p)?;
        let down = probe.loss(batch, labels)?;
        let gn = (up - down) / (2.0 * h);
        let rel = (ga - gn).abs() / ga.abs().max(gn.abs()).max(1e-8);
        worst = worst.max(rel);
    }
    Ok(worst)
}
