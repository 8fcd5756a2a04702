use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::model::{forward, loss_and_gradients_with, one_hot, Model, NUM_CLASSES};
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::metrics::{auc_trapezoid, ScoredLabels};
use crate::render::HeatmapImage;
use crate::rng::{derive_seed, rng_from_seed, ChaCha8Rng};

/// Class index of the abnormal label in the softmax head.
pub const ABNORMAL: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Adam,
    Sgd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 20,
            batch_size: 32,
            learning_rate: 1e-3,
            optimizer: OptimizerKind::Adam,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch size must be >= 1".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::InvalidConfig("learning rate must be positive".into()));
        }
        Ok(())
    }
}

/// Images stacked as a `(N, H, W, 3)` tensor with class indices.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledImages {
    pub images: Tensor,
    pub classes: Vec<usize>,
}

impl LabeledImages {
    pub fn new(images: Tensor, classes: Vec<usize>) -> Result<Self> {
        if images.shape().len() != 4 || images.shape()[0] != classes.len() {
            return Err(Error::Shape(format!(
                "{} labels for image tensor {:?}",
                classes.len(),
                images.shape()
            )));
        }
        if classes.iter().any(|c| *c >= NUM_CLASSES) {
            return Err(Error::Shape("class index out of range".into()));
        }
        Ok(Self { images, classes })
    }

    pub fn from_heatmaps(images: &[HeatmapImage], classes: Vec<usize>) -> Result<Self> {
        Self::new(images_to_tensor(images)?, classes)
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}

/// Stacks equally sized RGB heatmaps into `(N, H, W, 3)` pixel values.
pub fn images_to_tensor(images: &[HeatmapImage]) -> Result<Tensor> {
    let first = images
        .first()
        .ok_or_else(|| Error::Shape("no images".into()))?;
    let (w, h) = (first.width(), first.height());
    let mut data = Vec::with_capacity(images.len() * w * h * 3);
    for img in images {
        if (img.width(), img.height()) != (w, h) {
            return Err(Error::Shape(format!(
                "mixed image sizes {}x{} and {w}x{h}",
                img.width(),
                img.height()
            )));
        }
        data.extend(img.to_bytes().into_iter().map(f64::from));
    }
    Tensor::new(vec![images.len(), h, w, 3], data)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub train_accuracy: f64,
    pub validation_auc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs: Vec<EpochRecord>,
    /// Set when training stopped on a non-finite loss.
    pub diverged: Option<String>,
}

impl TrainReport {
    pub fn final_accuracy(&self) -> Option<f64> {
        self.epochs.last().map(|e| e.train_accuracy)
    }
}

#[derive(Debug, Clone)]
enum OptimizerState {
    Adam { m: Vec<f64>, v: Vec<f64>, t: i32 },
    Sgd,
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPSILON: f64 = 1e-7;

impl OptimizerState {
    fn new(kind: OptimizerKind, n: usize) -> Self {
        match kind {
            OptimizerKind::Adam => Self::Adam {
                m: vec![0.0; n],
                v: vec![0.0; n],
                t: 0,
            },
            OptimizerKind::Sgd => Self::Sgd,
        }
    }

    fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64) {
        match self {
            Self::Sgd => {
                for (p, g) in params.iter_mut().zip(grads) {
                    *p -= lr * g;
                }
            }
            Self::Adam { m, v, t } => {
                *t += 1;
                let c1 = 1.0 - ADAM_BETA1.powi(*t);
                let c2 = 1.0 - ADAM_BETA2.powi(*t);
                let step = lr * c2.sqrt() / c1;
                for i in 0..params.len() {
                    let g = grads[i];
                    m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * g;
                    v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * g * g;
                    params[i] -= step * m[i] / (v[i].sqrt() + ADAM_EPSILON * c2.sqrt());
                }
            }
        }
    }
}

/// Epoch-at-a-time mini-batch training. Shuffling and dropout draw from
/// the streams `"shuffle"` and `"dropout"` of the configured seed, so a
/// `(seed, data, config)` triple fixes every weight bit-for-bit.
pub struct Trainer {
    model: Model,
    config: TrainConfig,
    optimizer: OptimizerState,
    shuffle_rng: ChaCha8Rng,
    dropout_rng: ChaCha8Rng,
    report: TrainReport,
}

impl Trainer {
    pub fn new(model: Model, config: TrainConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            optimizer: OptimizerState::new(config.optimizer, model.num_params()),
            shuffle_rng: rng_from_seed(derive_seed(config.seed, "shuffle", 0)),
            dropout_rng: rng_from_seed(derive_seed(config.seed, "dropout", 0)),
            model,
            config,
            report: TrainReport::default(),
        })
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn report(&self) -> &TrainReport {
        &self.report
    }

    /// One pass over `train` in shuffled mini-batches. The recorded
    /// accuracy is measured in eval mode after the epoch's updates.
    pub fn run_epoch(&mut self, train: &LabeledImages, validation: Option<&LabeledImages>) -> Result<&EpochRecord> {
        if train.is_empty() {
            return Err(Error::Dataset("empty training set".into()));
        }
        let epoch = self.report.epochs.len() + 1;
        let mut order: Vec<usize> = (0..train.len()).collect();
        order.shuffle(&mut self.shuffle_rng);
        let mut total_loss = 0.0;
        for chunk in order.chunks(self.config.batch_size) {
            let batch = train.images.gather(chunk)?;
            let classes: Vec<usize> = chunk.iter().map(|&i| train.classes[i]).collect();
            let labels = one_hot(&classes)?;
            let (loss, grads, _) = loss_and_gradients_with(&self.model, &batch, &labels, Some(&mut self.dropout_rng))
                .map_err(|e| match e {
                    Error::Diverged { detail, .. } => Error::Diverged { epoch, detail },
                    other => other,
                })?;
            total_loss += loss * chunk.len() as f64;
            self.optimizer.step(self.model.params_mut(), &grads, self.config.learning_rate);
        }
        if !self.model.params().iter().all(|p| p.is_finite()) {
            return Err(Error::Diverged {
                epoch,
                detail: "non-finite parameter after update".into(),
            });
        }
        let train_accuracy = accuracy(&self.model, train)?;
        let validation_auc = match validation {
            Some(v) => evaluate_auc(&self.model, v).ok(),
            None => None,
        };
        self.report.epochs.push(EpochRecord {
            epoch,
            loss: total_loss / train.len() as f64,
            train_accuracy,
            validation_auc,
        });
        Ok(self.report.epochs.last().expect("just pushed"))
    }

    pub fn finish(self) -> (Model, TrainReport) {
        (self.model, self.report)
    }
}

/// Trains for `config.epochs` epochs. Divergence stops training and is
/// recorded in the returned report alongside the completed epochs.
pub fn train(
    model: Model,
    train_set: &LabeledImages,
    validation: Option<&LabeledImages>,
    config: &TrainConfig,
) -> Result<(Model, TrainReport)> {
    if train_set.is_empty() {
        return Err(Error::Dataset("empty training set".into()));
    }
    let mut trainer = Trainer::new(model, config.clone())?;
    for _ in 0..config.epochs {
        match trainer.run_epoch(train_set, validation) {
            Ok(_) => {}
            Err(Error::Diverged { epoch, detail }) => {
                trainer.report.diverged = Some(format!("epoch {epoch}: {detail}"));
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(trainer.finish())
}

/// Eval-mode probability of the abnormal class for every image.
pub fn predict(model: &Model, images: &Tensor) -> Result<Vec<f64>> {
    const CHUNK: usize = 64;
    let n = images.shape().first().copied().unwrap_or(0);
    let mut out = Vec::with_capacity(n);
    let indices: Vec<usize> = (0..n).collect();
    for chunk in indices.chunks(CHUNK) {
        let (probs, _) = forward(model, &images.gather(chunk)?, false, 0)?;
        out.extend((0..chunk.len()).map(|i| probs.outer(i)[ABNORMAL]));
    }
    Ok(out)
}

pub fn accuracy(model: &Model, data: &LabeledImages) -> Result<f64> {
    let scores = predict(model, &data.images)?;
    let correct = scores
        .iter()
        .zip(&data.classes)
        .filter(|(s, c)| usize::from(**s > 0.5) == **c)
        .count();
    Ok(correct as f64 / data.len() as f64)
}

pub fn evaluate_auc(model: &Model, data: &LabeledImages) -> Result<f64> {
    let scores = predict(model, &data.images)?;
    let labels = data.classes.iter().map(|c| *c == ABNORMAL).collect();
    auc_trapezoid(&ScoredLabels::new(scores, labels)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnn::model::ModelConfig;
    use rand::Rng;

    fn toy_data(n: usize, seed: u64) -> LabeledImages {
        // class 1 images are brighter in the top half
        let mut rng = rng_from_seed(seed);
        let (h, w) = (10, 10);
        let mut data = Vec::new();
        let mut classes = Vec::new();
        for i in 0..n {
            let class = i % 2;
            for y in 0..h {
                for _ in 0..w * 3 {
                    let base = if class == 1 && y < h / 2 { 200.0 } else { 60.0 };
                    data.push(base + rng.random_range(-40.0..40.0));
                }
            }
            classes.push(class);
        }
        LabeledImages::new(Tensor::new(vec![n, h, w, 3], data).unwrap(), classes).unwrap()
    }

    fn toy_config() -> ModelConfig {
        ModelConfig {
            input_height: 10,
            input_width: 10,
            input_channels: 3,
            conv_filters: vec![4],
            dense_units: vec![8, 8],
            dropout_rate: 0.25,
        }
    }

    #[test]
    fn rejects_bad_config() {
        let model = Model::build(toy_config(), 0).unwrap();
        let cfg = TrainConfig { epochs: 0, ..TrainConfig::default() };
        assert!(train(model.clone(), &toy_data(4, 0), None, &cfg).is_err());
        let cfg = TrainConfig { learning_rate: 0.0, ..TrainConfig::default() };
        assert!(Trainer::new(model, cfg).is_err());
    }

    #[test]
    fn learns_a_separable_toy_task() {
        let data = toy_data(16, 1);
        let model = Model::build(toy_config(), 2).unwrap();
        let cfg = TrainConfig { epochs: 40, batch_size: 4, learning_rate: 1e-2, ..TrainConfig::default() };
        let (model, report) = train(model, &data, Some(&data), &cfg).unwrap();
        assert_eq!(report.epochs.len(), 40);
        assert!(report.diverged.is_none());
        assert_eq!(report.final_accuracy(), Some(1.0));
        assert!(report.epochs.last().unwrap().loss < report.epochs[0].loss);
        assert_eq!(evaluate_auc(&model, &data).unwrap(), 1.0);
    }

    #[test]
    fn training_is_bit_reproducible() {
        let data = toy_data(12, 3);
        let cfg = TrainConfig { epochs: 3, batch_size: 5, seed: 11, ..TrainConfig::default() };
        let run = || train(Model::build(toy_config(), 4).unwrap(), &data, None, &cfg).unwrap();
        let (a, ra) = run();
        let (b, rb) = run();
        assert_eq!(a.params(), b.params());
        assert_eq!(ra, rb);
    }

    #[test]
    fn sgd_moves_parameters() {
        let data = toy_data(6, 3);
        let model = Model::build(toy_config(), 4).unwrap();
        let cfg = TrainConfig { epochs: 1, optimizer: OptimizerKind::Sgd, learning_rate: 0.1, ..TrainConfig::default() };
        let (trained, _) = train(model.clone(), &data, None, &cfg).unwrap();
        assert_ne!(trained.params(), model.params());
    }

    #[test]
    fn divergence_returns_partial_report() {
        let data = toy_data(6, 3);
        let mut model = Model::build(toy_config(), 4).unwrap();
        model.params_mut()[0] = f64::NAN;
        let cfg = TrainConfig { epochs: 3, ..TrainConfig::default() };
        let (_, report) = train(model, &data, None, &cfg).unwrap();
        assert!(report.diverged.is_some());
        assert!(report.epochs.is_empty());
    }

    #[test]
    fn predictions_are_probabilities() {
        let data = toy_data(5, 9);
        let model = Model::build(toy_config(), 4).unwrap();
        let a = predict(&model, &data.images).unwrap();
        let b = predict(&model, &data.images).unwrap();
        assert_eq!(a.len(), 5);
        assert_eq!(a, b);
        assert!(a.iter().all(|p| (0.0..=1.0).contains(p)));
        let (probs, _) = forward(&model, &data.images, false, 0).unwrap();
        for i in 0..5 {
            assert!((probs.outer(i).iter().sum::<f64>() - 1.0).abs() < 1e-6);
        }
    }
}
