use std::hash::{Hash, Hasher};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, ChaCha8Rng};

const KERNEL: usize = 3;
const LOG_EPS: f64 = 1e-12;
pub const NUM_CLASSES: usize = 2;

/// Layer stack of the classifier:
///
/// ```text
/// rescale(1/255)
/// [conv k×k (valid, stride 1) + relu → maxpool 2×2 stride 2] per conv_filters entry
/// flatten
/// [dense + relu → dropout] per dense_units entry
/// dense 2 + softmax
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub input_height: usize,
    pub input_width: usize,
    pub input_channels: usize,
    pub conv_filters: Vec<usize>,
    pub dense_units: Vec<usize>,
    pub dropout_rate: f64,
}

impl ModelConfig {
    /// Conv 16/32/64, dense 128/256, dropout 0.25, 3-channel input.
    pub fn table_one(input_height: usize, input_width: usize) -> Self {
        Self {
            input_height,
            input_width,
            input_channels: 3,
            conv_filters: vec![16, 32, 64],
            dense_units: vec![128, 256],
            dropout_rate: 0.25,
        }
    }

    /// Spatial `(height, width, channels)` after every conv and pool stage.
    pub fn stage_shapes(&self) -> Result<Vec<StageShape>> {
        let (mut h, mut w, mut c) = (self.input_height, self.input_width, self.input_channels);
        let mut out = Vec::new();
        for &filters in &self.conv_filters {
            if h < KERNEL || w < KERNEL {
                return Err(self.too_small());
            }
            let (ch, cw) = (h - KERNEL + 1, w - KERNEL + 1);
            let (ph, pw) = (ch / 2, cw / 2);
            if ph == 0 || pw == 0 {
                return Err(self.too_small());
            }
            out.push(StageShape {
                in_h: h,
                in_w: w,
                in_c: c,
                conv_h: ch,
                conv_w: cw,
                out_c: filters,
                pool_h: ph,
                pool_w: pw,
            });
            (h, w, c) = (ph, pw, filters);
        }
        Ok(out)
    }

    fn too_small(&self) -> Error {
        Error::InvalidConfig(format!(
            "{}x{} input is too small for {} conv/pool stages",
            self.input_height,
            self.input_width,
            self.conv_filters.len()
        ))
    }

    pub fn flatten_len(&self) -> Result<usize> {
        let stages = self.stage_shapes()?;
        Ok(match stages.last() {
            Some(s) => s.pool_h * s.pool_w * s.out_c,
            None => self.input_height * self.input_width * self.input_channels,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_height == 0 || self.input_width == 0 || self.input_channels == 0 {
            return Err(Error::InvalidConfig("input dimensions must be positive".into()));
        }
        if self.conv_filters.contains(&0) || self.dense_units.contains(&0) {
            return Err(Error::InvalidConfig("layer widths must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::InvalidConfig("dropout rate must be in [0, 1)".into()));
        }
        self.stage_shapes().map(|_| ())
    }

    fn input_len(&self) -> usize {
        self.input_height * self.input_width * self.input_channels
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StageShape {
    pub in_h: usize,
    pub in_w: usize,
    pub in_c: usize,
    pub conv_h: usize,
    pub conv_w: usize,
    pub out_c: usize,
    pub pool_h: usize,
    pub pool_w: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamKind {
    ConvWeight,
    ConvBias,
    DenseWeight,
    DenseBias,
}

/// Location of one parameter array inside the flat parameter vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamSlot {
    pub name: String,
    pub kind: ParamKind,
    pub shape: Vec<usize>,
    pub offset: usize,
    pub len: usize,
}

fn layout(config: &ModelConfig) -> Result<Vec<ParamSlot>> {
    let mut slots = Vec::new();
    let mut offset = 0;
    let mut push = |name: String, kind, shape: Vec<usize>| {
        let len = shape.iter().product();
        slots.push(ParamSlot {
            name,
            kind,
            shape,
            offset,
            len,
        });
        offset += len;
    };
    for (i, s) in config.stage_shapes()?.iter().enumerate() {
        push(format!("conv{i}.weight"), ParamKind::ConvWeight, vec![KERNEL, KERNEL, s.in_c, s.out_c]);
        push(format!("conv{i}.bias"), ParamKind::ConvBias, vec![s.out_c]);
    }
    let mut fan_in = config.flatten_len()?;
    let widths: Vec<usize> = config.dense_units.iter().copied().chain([NUM_CLASSES]).collect();
    for (i, &units) in widths.iter().enumerate() {
        push(format!("dense{i}.weight"), ParamKind::DenseWeight, vec![fan_in, units]);
        push(format!("dense{i}.bias"), ParamKind::DenseBias, vec![units]);
        fan_in = units;
    }
    Ok(slots)
}

/// Classifier parameters stored as one flat vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    config: ModelConfig,
    slots: Vec<ParamSlot>,
    stages: Vec<StageShape>,
    params: Vec<f64>,
}

/// Gradient of the loss with respect to every parameter, laid out like
/// [`Model::params`].
pub type Gradients = Vec<f64>;

impl Model {
    /// Glorot-uniform weights from the seeded generator; zero biases.
    pub fn build(config: ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let slots = layout(&config)?;
        let stages = config.stage_shapes()?;
        let total = slots.last().map_or(0, |s| s.offset + s.len);
        let mut params = vec![0.0; total];
        let mut rng = rng_from_seed(seed);
        for slot in &slots {
            let (fan_in, fan_out) = match slot.kind {
                ParamKind::ConvWeight => {
                    let area = slot.shape[0] * slot.shape[1];
                    (area * slot.shape[2], area * slot.shape[3])
                }
                ParamKind::DenseWeight => (slot.shape[0], slot.shape[1]),
                ParamKind::ConvBias | ParamKind::DenseBias => continue,
            };
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for p in &mut params[slot.offset..slot.offset + slot.len] {
                *p = rng.random_range(-limit..limit);
            }
        }
        Ok(Self {
            config,
            slots,
            stages,
            params,
        })
    }

    pub fn from_params(config: ModelConfig, params: Vec<f64>) -> Result<Self> {
        let mut model = Self::build(config, 0)?;
        if params.len() != model.params.len() {
            return Err(Error::Shape(format!(
                "{} parameters for a model with {}",
                params.len(),
                model.params.len()
            )));
        }
        model.params = params;
        Ok(model)
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn slots(&self) -> &[ParamSlot] {
        &self.slots
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    fn slot(&self, i: usize) -> &[f64] {
        let s = &self.slots[i];
        &self.params[s.offset..s.offset + s.len]
    }

    fn check_batch(&self, batch: &Tensor) -> Result<usize> {
        let c = &self.config;
        let want = [c.input_height, c.input_width, c.input_channels];
        if batch.shape().len() != 4 || batch.shape()[1..] != want {
            return Err(Error::Shape(format!(
                "batch shape {:?}, expected (B, {}, {}, {})",
                batch.shape(),
                want[0],
                want[1],
                want[2]
            )));
        }
        Ok(batch.shape()[0])
    }

    fn forward_one(&self, pixels: &[f64], dropout: Option<&mut ChaCha8Rng>) -> Trace {
        let mut dropout = dropout;
        let mut trace = Trace::default();
        let mut act: Vec<f64> = pixels.iter().map(|v| v / 255.0).collect();
        for (i, s) in self.stages.iter().enumerate() {
            let conv = conv_forward(&act, s, self.slot(2 * i), self.slot(2 * i + 1));
            let (pooled, argmax) = max_pool(&conv, s);
            trace.stage_inputs.push(std::mem::replace(&mut act, pooled));
            trace.conv_out.push(conv);
            trace.pool_argmax.push(argmax);
        }
        let first_dense = 2 * self.stages.len();
        let hidden = self.config.dense_units.len();
        let keep = 1.0 - self.config.dropout_rate;
        for layer in 0..=hidden {
            let w = self.slot(first_dense + 2 * layer);
            let b = self.slot(first_dense + 2 * layer + 1);
            let mut out = dense_forward(&act, w, b);
            let mut mask = None;
            if layer < hidden {
                for v in &mut out {
                    *v = v.max(0.0);
                }
                trace.relu_out.push(out.clone());
                if let Some(rng) = dropout.as_deref_mut() {
                    let m: Vec<f64> = out
                        .iter()
                        .map(|_| if rng.random::<f64>() < keep { 1.0 / keep } else { 0.0 })
                        .collect();
                    for (v, s) in out.iter_mut().zip(&m) {
                        *v *= s;
                    }
                    mask = Some(m);
                }
            }
            trace.dense_inputs.push(std::mem::replace(&mut act, out));
            trace.dropout_masks.push(mask);
        }
        trace.probs = softmax(&act);
        trace
    }

    fn backward_one(&self, trace: &Trace, dlogits: &[f64], grads: &mut [f64]) {
        let first_dense = 2 * self.stages.len();
        let hidden = self.config.dense_units.len();
        let mut delta = dlogits.to_vec();
        for layer in (0..=hidden).rev() {
            let wi = first_dense + 2 * layer;
            let input = &trace.dense_inputs[layer];
            let (ws, bs) = (&self.slots[wi], &self.slots[wi + 1]);
            let units = delta.len();
            for (g, d) in grads[bs.offset..bs.offset + bs.len].iter_mut().zip(&delta) {
                *g += d;
            }
            let w = self.slot(wi);
            let gw = &mut grads[ws.offset..ws.offset + ws.len];
            let mut dinput = vec![0.0; input.len()];
            for (i, &x) in input.iter().enumerate() {
                let row = i * units;
                let mut acc = 0.0;
                for o in 0..units {
                    gw[row + o] += x * delta[o];
                    acc += w[row + o] * delta[o];
                }
                dinput[i] = acc;
            }
            if layer > 0 {
                let prev = layer - 1;
                if let Some(mask) = &trace.dropout_masks[prev] {
                    for (d, m) in dinput.iter_mut().zip(mask) {
                        *d *= m;
                    }
                }
                for (d, r) in dinput.iter_mut().zip(&trace.relu_out[prev]) {
                    if *r <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
            delta = dinput;
        }
        for (i, s) in self.stages.iter().enumerate().rev() {
            let conv = &trace.conv_out[i];
            let mut dconv = vec![0.0; conv.len()];
            for (d, &src) in delta.iter().zip(&trace.pool_argmax[i]) {
                dconv[src as usize] += d;
            }
            for (d, c) in dconv.iter_mut().zip(conv) {
                if *c <= 0.0 {
                    *d = 0.0;
                }
            }
            let (ws, bs) = (self.slots[2 * i].clone(), self.slots[2 * i + 1].clone());
            let (gw_part, gb_part) = grads.split_at_mut(bs.offset);
            let gw = &mut gw_part[ws.offset..ws.offset + ws.len];
            let gb = &mut gb_part[..bs.len];
            delta = conv_backward(
                &trace.stage_inputs[i],
                s,
                self.slot(2 * i),
                &dconv,
                gw,
                gb,
                i > 0,
            );
        }
    }
}

#[derive(Debug, Clone, Default)]
struct Trace {
    stage_inputs: Vec<Vec<f64>>,
    conv_out: Vec<Vec<f64>>,
    pool_argmax: Vec<Vec<u32>>,
    dense_inputs: Vec<Vec<f64>>,
    relu_out: Vec<Vec<f64>>,
    dropout_masks: Vec<Option<Vec<f64>>>,
    probs: Vec<f64>,
}

/// Per-example activations retained by [`forward`] for backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    traces: Vec<Trace>,
}

impl ForwardCache {
    /// Hash of every relu on/off state and pooling argmax. Two forward
    /// passes with equal signatures lie in the same linear region of the
    /// network.
    pub fn pattern_signature(&self) -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        for t in &self.traces {
            for layer in t.conv_out.iter().chain(&t.relu_out) {
                for v in layer {
                    (*v > 0.0).hash(&mut h);
                }
            }
            t.pool_argmax.hash(&mut h);
        }
        h.finish()
    }
}

fn conv_forward(input: &[f64], s: &StageShape, w: &[f64], b: &[f64]) -> Vec<f64> {
    let (cin, cout) = (s.in_c, s.out_c);
    let mut out = vec![0.0; s.conv_h * s.conv_w * cout];
    for oy in 0..s.conv_h {
        for ox in 0..s.conv_w {
            let o = &mut out[(oy * s.conv_w + ox) * cout..][..cout];
            o.copy_from_slice(b);
            for ky in 0..KERNEL {
                for kx in 0..KERNEL {
                    let src = &input[((oy + ky) * s.in_w + ox + kx) * cin..][..cin];
                    let wk = &w[(ky * KERNEL + kx) * cin * cout..][..cin * cout];
                    for (ci, &x) in src.iter().enumerate() {
                        for (acc, wv) in o.iter_mut().zip(&wk[ci * cout..(ci + 1) * cout]) {
                            *acc += x * wv;
                        }
                    }
                }
            }
            for v in o.iter_mut() {
                *v = v.max(0.0);
            }
        }
    }
    out
}

/// Accumulates weight and bias gradients; returns the input gradient when
/// `need_input` is set (empty otherwise).
fn conv_backward(
    input: &[f64],
    s: &StageShape,
    w: &[f64],
    dout: &[f64],
    gw: &mut [f64],
    gb: &mut [f64],
    need_input: bool,
) -> Vec<f64> {
    let (cin, cout) = (s.in_c, s.out_c);
    let mut din = if need_input { vec![0.0; input.len()] } else { Vec::new() };
    for oy in 0..s.conv_h {
        for ox in 0..s.conv_w {
            let d = &dout[(oy * s.conv_w + ox) * cout..][..cout];
            if d.iter().all(|v| *v == 0.0) {
                continue;
            }
            for (g, dv) in gb.iter_mut().zip(d) {
                *g += dv;
            }
            for ky in 0..KERNEL {
                for kx in 0..KERNEL {
                    let base = ((oy + ky) * s.in_w + ox + kx) * cin;
                    let koff = (ky * KERNEL + kx) * cin * cout;
                    for ci in 0..cin {
                        let x = input[base + ci];
                        let wrow = &w[koff + ci * cout..][..cout];
                        let grow = &mut gw[koff + ci * cout..][..cout];
                        let mut acc = 0.0;
                        for o in 0..cout {
                            grow[o] += x * d[o];
                            acc += wrow[o] * d[o];
                        }
                        if need_input {
                            din[base + ci] += acc;
                        }
                    }
                }
            }
        }
    }
    din
}

/// 2×2 stride-2 max pooling; ties go to the first position in row-major
/// window order.
fn max_pool(conv: &[f64], s: &StageShape) -> (Vec<f64>, Vec<u32>) {
    let c = s.out_c;
    let mut out = vec![0.0; s.pool_h * s.pool_w * c];
    let mut argmax = vec![0u32; out.len()];
    for py in 0..s.pool_h {
        for px in 0..s.pool_w {
            for ch in 0..c {
                let mut best = f64::NEG_INFINITY;
                let mut best_idx = 0;
                for (dy, dx) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                    let idx = ((2 * py + dy) * s.conv_w + 2 * px + dx) * c + ch;
                    if conv[idx] > best {
                        best = conv[idx];
                        best_idx = idx;
                    }
                }
                let o = (py * s.pool_w + px) * c + ch;
                out[o] = best;
                argmax[o] = best_idx as u32;
            }
        }
    }
    (out, argmax)
}

fn dense_forward(input: &[f64], w: &[f64], b: &[f64]) -> Vec<f64> {
    let units = b.len();
    let mut out = b.to_vec();
    for (i, &x) in input.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (o, wv) in out.iter_mut().zip(&w[i * units..(i + 1) * units]) {
            *o += x * wv;
        }
    }
    out
}

/// Max-subtracted softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Runs the network on a `(B, H, W, C)` batch of 0–255 pixel values.
///
/// Dropout is applied only when `training` is set, with masks drawn from a
/// generator seeded by `seed`. Returns `(B, 2)` class probabilities.
pub fn forward(model: &Model, batch: &Tensor, training: bool, seed: u64) -> Result<(Tensor, ForwardCache)> {
    let mut rng = rng_from_seed(seed);
    forward_with(model, batch, training.then_some(&mut rng))
}

pub(crate) fn forward_with(
    model: &Model,
    batch: &Tensor,
    mut dropout: Option<&mut ChaCha8Rng>,
) -> Result<(Tensor, ForwardCache)> {
    let b = model.check_batch(batch)?;
    debug_assert_eq!(batch.outer(0).len(), model.config.input_len());
    let traces: Vec<Trace> = (0..b)
        .map(|i| model.forward_one(batch.outer(i), dropout.as_deref_mut()))
        .collect();
    let probs = traces.iter().flat_map(|t| t.probs.iter().copied()).collect();
    Ok((Tensor::new(vec![b, NUM_CLASSES], probs)?, ForwardCache { traces }))
}

/// Mean categorical cross-entropy `−Σ y·ln(p + 1e-12)` and its exact
/// gradient for every parameter.
pub fn loss_and_gradients(
    model: &Model,
    batch: &Tensor,
    labels: &Tensor,
    dropout_seed: Option<u64>,
) -> Result<(f64, Gradients)> {
    let mut rng = dropout_seed.map(rng_from_seed);
    let (loss, grads, _) = loss_and_gradients_with(model, batch, labels, rng.as_mut())?;
    Ok((loss, grads))
}

pub(crate) fn loss_and_gradients_with(
    model: &Model,
    batch: &Tensor,
    labels: &Tensor,
    dropout: Option<&mut ChaCha8Rng>,
) -> Result<(f64, Gradients, Tensor)> {
    let b = model.check_batch(batch)?;
    if labels.shape() != [b, NUM_CLASSES] {
        return Err(Error::Shape(format!(
            "labels shape {:?}, expected ({b}, {NUM_CLASSES})",
            labels.shape()
        )));
    }
    let (probs, cache) = forward_with(model, batch, dropout)?;
    let mut grads = vec![0.0; model.num_params()];
    let mut loss = 0.0;
    for (i, trace) in cache.traces.iter().enumerate() {
        let y = labels.outer(i);
        let p = &trace.probs;
        loss -= y.iter().zip(p).map(|(y, p)| y * (p + LOG_EPS).ln()).sum::<f64>();
        // dL/dp_j = −y_j / (p_j + ε) / B, then through the softmax Jacobian
        let g: Vec<f64> = y.iter().zip(p).map(|(y, p)| -y / (p + LOG_EPS) / b as f64).collect();
        let dot: f64 = g.iter().zip(p).map(|(g, p)| g * p).sum();
        let dlogits: Vec<f64> = p.iter().zip(&g).map(|(p, g)| p * (g - dot)).collect();
        model.backward_one(trace, &dlogits, &mut grads);
    }
    loss /= b as f64;
    if !loss.is_finite() {
        return Err(Error::Diverged {
            epoch: 0,
            detail: format!("loss is {loss}"),
        });
    }
    Ok((loss, grads, probs))
}

/// One-hot `(B, 2)` labels from class indices.
pub fn one_hot(classes: &[usize]) -> Result<Tensor> {
    let mut data = vec![0.0; classes.len() * NUM_CLASSES];
    for (i, &c) in classes.iter().enumerate() {
        if c >= NUM_CLASSES {
            return Err(Error::Shape(format!("class index {c} out of range")));
        }
        data[i * NUM_CLASSES + c] = 1.0;
    }
    Tensor::new(vec![classes.len(), NUM_CLASSES], data)
}
