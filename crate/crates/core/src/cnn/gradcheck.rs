//! Central finite-difference verification of [`loss_and_gradients`].

use serde::{Deserialize, Serialize};

use super::model::{forward, loss_and_gradients, Model};
use super::tensor::Tensor;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradCheckConfig {
    /// Initial central-difference step.
    pub step: f64,
    /// Smallest step tried when a step crosses a relu or pooling kink.
    pub min_step: f64,
    /// Gradients smaller than this in magnitude are compared absolutely
    /// against it instead of relatively.
    pub abs_floor: f64,
    /// Fixed dropout mask seed, or `None` for eval mode.
    pub dropout_seed: Option<u64>,
    /// Check every `stride`-th parameter (1 checks all of them).
    pub stride: usize,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        Self {
            step: 1e-3,
            min_step: 1e-7,
            abs_floor: 1e-8,
            dropout_seed: Some(0),
            stride: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradCheckReport {
    pub checked: usize,
    /// Parameters whose every step crossed a kink; left unchecked.
    pub kinked: usize,
    /// Parameters that needed a smaller step than the initial one.
    pub refined: usize,
    pub max_rel_error: f64,
    /// Index and `(analytic, numeric)` of the worst parameter.
    pub worst: Option<(usize, f64, f64)>,
}

/// Compares every analytic gradient with `(L(θ+h) − L(θ−h)) / 2h`.
///
/// A difference is only trusted when both perturbed passes keep the
/// unperturbed relu and max-pool pattern; otherwise `h` shrinks by 10×.
pub fn gradient_check(model: &Model, batch: &Tensor, labels: &Tensor, config: &GradCheckConfig) -> Result<GradCheckReport> {
    let (_, analytic) = loss_and_gradients(model, batch, labels, config.dropout_seed)?;
    let training = config.dropout_seed.is_some();
    let seed = config.dropout_seed.unwrap_or(0);
    let signature = |m: &Model| -> Result<u64> { Ok(forward(m, batch, training, seed)?.1.pattern_signature()) };
    let base = signature(model)?;
    let mut probe = model.clone();
    let mut report = GradCheckReport {
        checked: 0,
        kinked: 0,
        refined: 0,
        max_rel_error: 0.0,
        worst: None,
    };
    for i in (0..model.num_params()).step_by(config.stride.max(1)) {
        let original = model.params()[i];
        let mut h = config.step;
        let mut numeric = None;
        while h >= config.min_step {
            probe.params_mut()[i] = original + h;
            let plus_sig = signature(&probe)?;
            let (plus, _) = loss_and_gradients(&probe, batch, labels, config.dropout_seed)?;
            probe.params_mut()[i] = original - h;
            let minus_sig = signature(&probe)?;
            let (minus, _) = loss_and_gradients(&probe, batch, labels, config.dropout_seed)?;
            if plus_sig == base && minus_sig == base {
                numeric = Some((plus - minus) / (2.0 * h));
                break;
            }
            h /= 10.0;
        }
        probe.params_mut()[i] = original;
        let Some(n) = numeric else {
            report.kinked += 1;
            continue;
        };
        if h < config.step {
            report.refined += 1;
        }
        let a = analytic[i];
        let err = (a - n).abs() / a.abs().max(n.abs()).max(config.abs_floor);
        report.checked += 1;
        if err > report.max_rel_error || report.worst.is_none() {
            report.max_rel_error = report.max_rel_error.max(err);
            report.worst = Some((i, a, n));
        }
    }
    Ok(report)
}
