//! Dense feed-forward networks with explicit forward/backward passes.
//!
//! Everything is kept analytic so gradients can be verified against finite
//! differences: linear layers, leaky ReLU, batch normalization, and a
//! second backward pass ([`Mlp::penalty_backward`]) that differentiates a
//! function of the network's *input gradient* with respect to the weights,
//! which the critic's gradient penalty needs.
//!
//! Forward passes are pure; batch-norm running statistics only change when
//! the trainer explicitly calls [`Mlp::update_running_stats`].

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const BN_EPS: f64 = 1e-5;
pub const BN_MOMENTUM: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    /// [out, in]
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl Linear {
    fn new(fan_in: usize, fan_out: usize, rng: &mut impl Rng) -> Linear {
        let k = 1.0 / (fan_in as f64).sqrt();
        Linear {
            w: Array2::from_shape_fn((fan_out, fan_in), |_| rng.random_range(-k..k)),
            b: Array1::from_shape_fn(fan_out, |_| rng.random_range(-k..k)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchNorm {
    pub gamma: Array1<f64>,
    pub beta: Array1<f64>,
    pub running_mean: Array1<f64>,
    pub running_var: Array1<f64>,
}

impl BatchNorm {
    fn new(width: usize) -> BatchNorm {
        BatchNorm {
            gamma: Array1::ones(width),
            beta: Array1::zeros(width),
            running_mean: Array1::zeros(width),
            running_var: Array1::ones(width),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Linear(Linear),
    LeakyRelu(f64),
    BatchNorm(BatchNorm),
}

#[derive(Debug, Clone)]
pub enum LayerCache {
    /// Input to the linear layer.
    Linear(Array2<f64>),
    /// Elementwise derivative (1 or the slope).
    LeakyRelu(Array2<f64>),
    BatchNorm {
        xhat: Array2<f64>,
        inv_std: Array1<f64>,
        batch_mean: Array1<f64>,
        batch_var: Array1<f64>,
        mode: Mode,
    },
}

#[derive(Debug, Clone)]
pub struct ForwardCache {
    layers: Vec<LayerCache>,
}

/// Per-layer gradients mirroring [`Mlp::layers`].
#[derive(Debug, Clone)]
pub enum LayerGrads {
    Linear { dw: Array2<f64>, db: Array1<f64> },
    BatchNorm { dgamma: Array1<f64>, dbeta: Array1<f64> },
    None,
}

#[derive(Debug, Clone)]
pub struct MlpGrads {
    pub layers: Vec<LayerGrads>,
}

/// A feed-forward network: a plain sequence of layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Layer>,
}

impl Mlp {
    /// Builds `sizes[0] -> sizes[1] -> ... -> sizes.last()` with leaky-ReLU
    /// hidden activations (optionally preceded by batch normalization) and a
    /// linear output layer.
    pub fn feedforward(
        sizes: &[usize],
        slope: f64,
        batch_norm_hidden: bool,
        rng: &mut impl Rng,
    ) -> Mlp {
        assert!(sizes.len() >= 2, "network needs input and output sizes");
        let mut layers = Vec::new();
        for i in 0..sizes.len() - 1 {
            layers.push(Layer::Linear(Linear::new(sizes[i], sizes[i + 1], rng)));
            let is_output = i == sizes.len() - 2;
            if !is_output {
                if batch_norm_hidden {
                    layers.push(Layer::BatchNorm(BatchNorm::new(sizes[i + 1])));
                }
                layers.push(Layer::LeakyRelu(slope));
            }
        }
        Mlp { layers }
    }

    pub fn input_width(&self) -> usize {
        match &self.layers[0] {
            Layer::Linear(l) => l.w.ncols(),
            _ => panic!("first layer must be linear"),
        }
    }

    pub fn output_width(&self) -> usize {
        self.layers
            .iter()
            .rev()
            .find_map(|l| match l {
                Layer::Linear(l) => Some(l.w.nrows()),
                _ => None,
            })
            .expect("network has a linear layer")
    }

    /// Pure forward pass. In `Train` mode batch-norm uses batch statistics
    /// (recorded in the cache); in `Eval` mode it uses running statistics.
    pub fn forward(&self, x: &Array2<f64>, mode: Mode) -> (Array2<f64>, ForwardCache) {
        let mut h = x.clone();
        let mut caches = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            match layer {
                Layer::Linear(l) => {
                    caches.push(LayerCache::Linear(h.clone()));
                    h = h.dot(&l.w.t()) + &l.b;
                }
                Layer::LeakyRelu(slope) => {
                    let mask = h.mapv(|v| if v >= 0.0 { 1.0 } else { *slope });
                    h.zip_mut_with(&mask, |v, m| *v *= m);
                    caches.push(LayerCache::LeakyRelu(mask));
                }
                Layer::BatchNorm(bn) => {
                    let n = h.nrows() as f64;
                    let (mean, var) = match mode {
                        Mode::Train => {
                            let mean = h.mean_axis(Axis(0)).expect("non-empty batch");
                            let centered = &h - &mean;
                            let var = centered.mapv(|v| v * v).sum_axis(Axis(0)) / n;
                            (mean, var)
                        }
                        Mode::Eval => (bn.running_mean.clone(), bn.running_var.clone()),
                    };
                    let inv_std = var.mapv(|v| 1.0 / (v + BN_EPS).sqrt());
                    let xhat = (&h - &mean) * &inv_std;
                    h = &xhat * &bn.gamma + &bn.beta;
                    caches.push(LayerCache::BatchNorm {
                        xhat,
                        inv_std,
                        batch_mean: mean,
                        batch_var: var,
                        mode,
                    });
                }
            }
        }
        (h, ForwardCache { layers: caches })
    }

    /// Convenience: forward without keeping the cache.
    pub fn forward_value(&self, x: &Array2<f64>, mode: Mode) -> Array2<f64> {
        self.forward(x, mode).0
    }

    /// Folds the batch statistics recorded in `cache` into the running
    /// statistics, the way a train-mode forward pass would.
    pub fn update_running_stats(&mut self, cache: &ForwardCache) {
        for (layer, lc) in self.layers.iter_mut().zip(&cache.layers) {
            if let (
                Layer::BatchNorm(bn),
                LayerCache::BatchNorm {
                    batch_mean,
                    batch_var,
                    mode: Mode::Train,
                    ..
                },
            ) = (layer, lc)
            {
                bn.running_mean = &bn.running_mean * (1.0 - BN_MOMENTUM) + batch_mean * BN_MOMENTUM;
                bn.running_var = &bn.running_var * (1.0 - BN_MOMENTUM) + batch_var * BN_MOMENTUM;
            }
        }
    }

    pub fn zero_grads(&self) -> MlpGrads {
        let layers = self
            .layers
            .iter()
            .map(|l| match l {
                Layer::Linear(l) => LayerGrads::Linear {
                    dw: Array2::zeros(l.w.dim()),
                    db: Array1::zeros(l.b.len()),
                },
                Layer::BatchNorm(bn) => LayerGrads::BatchNorm {
                    dgamma: Array1::zeros(bn.gamma.len()),
                    dbeta: Array1::zeros(bn.beta.len()),
                },
                Layer::LeakyRelu(_) => LayerGrads::None,
            })
            .collect();
        MlpGrads { layers }
    }

    /// Standard backward pass: accumulates parameter gradients into `grads`
    /// and returns the gradient with respect to the input batch.
    pub fn backward(&self, cache: &ForwardCache, dy: Array2<f64>, grads: &mut MlpGrads) -> Array2<f64> {
        let mut d = dy;
        for ((layer, lc), lg) in self
            .layers
            .iter()
            .zip(&cache.layers)
            .zip(&mut grads.layers)
            .rev()
        {
            d = backward_layer(layer, lc, d, Some(lg));
        }
        d
    }

    /// Backward pass that touches no parameter gradients; used to push
    /// cotangents through frozen networks. Also records the cotangent
    /// arriving at every linear layer, which [`Mlp::penalty_backward`] needs.
    pub fn input_gradient(&self, cache: &ForwardCache, dy: Array2<f64>) -> (Array2<f64>, Vec<Array2<f64>>) {
        let mut d = dy;
        let mut deltas = vec![Array2::zeros((0, 0)); self.layers.len()];
        for (i, (layer, lc)) in self.layers.iter().zip(&cache.layers).enumerate().rev() {
            if matches!(layer, Layer::Linear(_)) {
                deltas[i] = d.clone();
            }
            d = backward_layer(layer, lc, d, None);
        }
        (d, deltas)
    }

    /// Gradient, with respect to the parameters, of a scalar function `p` of
    /// this network's input gradient `g = d(output)/d(input)`.
    ///
    /// `deltas` must come from the [`Mlp::input_gradient`] call that produced
    /// `g`, and `v = dp/dg` row-per-sample. Piecewise-linear activations have
    /// zero second derivative almost everywhere, so bias gradients vanish and
    /// each weight picks up `delta^T . s`, where `s` is `v` propagated
    /// forward through the transposed network. Only linear and leaky-ReLU
    /// layers are supported.
    pub fn penalty_backward(
        &self,
        cache: &ForwardCache,
        deltas: &[Array2<f64>],
        v: &Array2<f64>,
        grads: &mut MlpGrads,
    ) {
        let mut s = v.clone();
        for ((i, layer), lg) in self.layers.iter().enumerate().zip(&mut grads.layers) {
            match (layer, &cache.layers[i]) {
                (Layer::Linear(l), LayerCache::Linear(_)) => {
                    if let LayerGrads::Linear { dw, .. } = lg {
                        *dw += &deltas[i].t().dot(&s);
                    }
                    s = s.dot(&l.w.t());
                }
                (Layer::LeakyRelu(_), LayerCache::LeakyRelu(mask)) => {
                    s.zip_mut_with(mask, |v, m| *v *= m);
                }
                _ => panic!("penalty_backward supports linear and leaky-ReLU layers only"),
            }
        }
    }

    /// Trainable parameters flattened in layer order.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for layer in &self.layers {
            match layer {
                Layer::Linear(l) => {
                    out.extend(l.w.iter());
                    out.extend(l.b.iter());
                }
                Layer::BatchNorm(bn) => {
                    out.extend(bn.gamma.iter());
                    out.extend(bn.beta.iter());
                }
                Layer::LeakyRelu(_) => {}
            }
        }
        out
    }

    pub fn set_flat_params(&mut self, params: &[f64]) {
        let mut it = params.iter();
        for layer in &mut self.layers {
            match layer {
                Layer::Linear(l) => {
                    for v in l.w.iter_mut() {
                        *v = *it.next().expect("enough parameters");
                    }
                    for v in l.b.iter_mut() {
                        *v = *it.next().expect("enough parameters");
                    }
                }
                Layer::BatchNorm(bn) => {
                    for v in bn.gamma.iter_mut() {
                        *v = *it.next().expect("enough parameters");
                    }
                    for v in bn.beta.iter_mut() {
                        *v = *it.next().expect("enough parameters");
                    }
                }
                Layer::LeakyRelu(_) => {}
            }
        }
        assert!(it.next().is_none(), "parameter count mismatch");
    }

    /// Gradients flattened in the same order as [`Mlp::flat_params`].
    pub fn flat_grads(grads: &MlpGrads) -> Vec<f64> {
        let mut out = Vec::new();
        for lg in &grads.layers {
            match lg {
                LayerGrads::Linear { dw, db } => {
                    out.extend(dw.iter());
                    out.extend(db.iter());
                }
                LayerGrads::BatchNorm { dgamma, dbeta } => {
                    out.extend(dgamma.iter());
                    out.extend(dbeta.iter());
                }
                LayerGrads::None => {}
            }
        }
        out
    }

    /// All tensors by name (including batch-norm running statistics), for
    /// checkpointing. Shapes are row-major.
    pub fn named_tensors(&self) -> Vec<(String, Vec<usize>, Vec<f64>)> {
        let mut out = Vec::new();
        for (i, layer) in self.layers.iter().enumerate() {
            match layer {
                Layer::Linear(l) => {
                    out.push((
                        format!("layer{i}.weight"),
                        vec![l.w.nrows(), l.w.ncols()],
                        l.w.iter().copied().collect(),
                    ));
                    out.push((format!("layer{i}.bias"), vec![l.b.len()], l.b.to_vec()));
                }
                Layer::BatchNorm(bn) => {
                    out.push((format!("layer{i}.gamma"), vec![bn.gamma.len()], bn.gamma.to_vec()));
                    out.push((format!("layer{i}.beta"), vec![bn.beta.len()], bn.beta.to_vec()));
                    out.push((
                        format!("layer{i}.running_mean"),
                        vec![bn.running_mean.len()],
                        bn.running_mean.to_vec(),
                    ));
                    out.push((
                        format!("layer{i}.running_var"),
                        vec![bn.running_var.len()],
                        bn.running_var.to_vec(),
                    ));
                }
                Layer::LeakyRelu(_) => {}
            }
        }
        out
    }

    /// Restores tensors written by [`Mlp::named_tensors`].
    pub fn load_named_tensors(&mut self, tensors: &[(String, Vec<usize>, Vec<f64>)]) -> Result<()> {
        let expected = self.named_tensors();
        if expected.len() != tensors.len() {
            return Err(Error::Checkpoint(format!(
                "expected {} tensors, found {}",
                expected.len(),
                tensors.len()
            )));
        }
        for ((name, shape, _), (found_name, found_shape, values)) in expected.iter().zip(tensors) {
            if name != found_name || shape != found_shape {
                return Err(Error::Checkpoint(format!(
                    "tensor mismatch: expected {name} {shape:?}, found {found_name} {found_shape:?}"
                )));
            }
            if values.len() != shape.iter().product::<usize>() {
                return Err(Error::Checkpoint(format!(
                    "tensor {name} has {} values for shape {shape:?}",
                    values.len()
                )));
            }
        }
        let groups = group_tensors(tensors);
        let mut next_group = groups.iter();
        for layer in self.layers.iter_mut() {
            match layer {
                Layer::Linear(l) => {
                    let chunk = next_group.next().expect("validated tensor count");
                    l.w = Array2::from_shape_vec(l.w.dim(), chunk[0].2.clone())
                        .map_err(|e: ndarray::ShapeError| Error::Checkpoint(e.to_string()))?;
                    l.b = Array1::from_vec(chunk[1].2.clone());
                }
                Layer::BatchNorm(bn) => {
                    let chunk = next_group.next().expect("validated tensor count");
                    bn.gamma = Array1::from_vec(chunk[0].2.clone());
                    bn.beta = Array1::from_vec(chunk[1].2.clone());
                    bn.running_mean = Array1::from_vec(chunk[2].2.clone());
                    bn.running_var = Array1::from_vec(chunk[3].2.clone());
                }
                Layer::LeakyRelu(_) => {}
            }
        }
        Ok(())
    }

    /// Sum of all trainable parameters; cheap change detector for tests.
    pub fn param_checksum(&self) -> f64 {
        self.flat_params().iter().sum()
    }
}

/// Splits a flat tensor list into per-layer chunks (2 for linear, 4 for
/// batch norm), relying on the naming convention of `named_tensors`.
fn group_tensors(tensors: &[(String, Vec<usize>, Vec<f64>)]) -> Vec<Vec<&(String, Vec<usize>, Vec<f64>)>> {
    let mut groups: Vec<Vec<&(String, Vec<usize>, Vec<f64>)>> = Vec::new();
    let mut current_prefix = String::new();
    for t in tensors {
        let prefix = t.0.split('.').next().unwrap_or("").to_string();
        if prefix != current_prefix {
            groups.push(Vec::new());
            current_prefix = prefix;
        }
        groups.last_mut().unwrap().push(t);
    }
    groups
}

fn backward_layer(
    layer: &Layer,
    cache: &LayerCache,
    dy: Array2<f64>,
    grads: Option<&mut LayerGrads>,
) -> Array2<f64> {
    match (layer, cache) {
        (Layer::Linear(l), LayerCache::Linear(input)) => {
            if let Some(LayerGrads::Linear { dw, db }) = grads {
                *dw += &dy.t().dot(input);
                *db += &dy.sum_axis(Axis(0));
            }
            dy.dot(&l.w)
        }
        (Layer::LeakyRelu(_), LayerCache::LeakyRelu(mask)) => {
            let mut d = dy;
            d.zip_mut_with(mask, |v, m| *v *= m);
            d
        }
        (Layer::BatchNorm(bn), LayerCache::BatchNorm { xhat, inv_std, mode, .. }) => {
            match mode {
                Mode::Train => {
                    let n = dy.nrows() as f64;
                    if let Some(LayerGrads::BatchNorm { dgamma, dbeta }) = grads {
                        *dgamma += &(&dy * xhat).sum_axis(Axis(0));
                        *dbeta += &dy.sum_axis(Axis(0));
                    }
                    let dxhat = &dy * &bn.gamma;
                    let sum_dxhat = dxhat.sum_axis(Axis(0));
                    let sum_dxhat_xhat = (&dxhat * xhat).sum_axis(Axis(0));
                    let mut dx = dxhat * n;
                    dx = dx - &sum_dxhat;
                    dx = dx - &(xhat * &sum_dxhat_xhat);
                    dx * &(inv_std / n)
                }
                Mode::Eval => {
                    if let Some(LayerGrads::BatchNorm { dgamma, dbeta }) = grads {
                        *dgamma += &(&dy * xhat).sum_axis(Axis(0));
                        *dbeta += &dy.sum_axis(Axis(0));
                    }
                    dy * &(&bn.gamma * inv_std)
                }
            }
        }
        _ => panic!("layer/cache mismatch"),
    }
}

/// Adaptive moment estimation over a network's parameter gradients.
#[derive(Debug, Clone)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    t: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    pub fn new(net: &Mlp, lr: f64, beta1: f64, beta2: f64) -> Adam {
        let n = net.flat_params().len();
        Adam {
            lr,
            beta1,
            beta2,
            eps: 1e-8,
            t: 0,
            m: vec![0.0; n],
            v: vec![0.0; n],
        }
    }

    pub fn step(&mut self, net: &mut Mlp, grads: &MlpGrads) {
        let g = Mlp::flat_grads(grads);
        let mut p = net.flat_params();
        assert_eq!(g.len(), p.len());
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..p.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g[i] * g[i];
            let mhat = self.m[i] / bc1;
            let vhat = self.v[i] / bc2;
            p[i] -= self.lr * mhat / (vhat.sqrt() + self.eps);
        }
        net.set_flat_params(&p);
    }
}

/// Serializable description of one network's layer chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerChain {
    pub sizes: Vec<usize>,
    pub slope: f64,
    pub batch_norm_hidden: bool,
}

impl LayerChain {
    pub fn build(&self, rng: &mut impl Rng) -> Mlp {
        Mlp::feedforward(&self.sizes, self.slope, self.batch_norm_hidden, rng)
    }
}
