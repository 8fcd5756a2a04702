//! A small CNN classifier written from scratch: tensors, the conv/pool/dense
//! stack, exact backpropagation, Adam/SGD training and prediction.

mod gradcheck;
mod io;
mod model;
mod tensor;
mod train;

pub use gradcheck::{gradient_check, GradCheckConfig, GradCheckReport};
pub use io::{decode_weights, encode_weights, load_weights, save_weights, WeightsHeader};
pub use model::{
    forward, loss_and_gradients, one_hot, softmax, ForwardCache, Gradients, Model, ModelConfig,
    ParamKind, ParamSlot, StageShape, NUM_CLASSES,
};
pub use tensor::Tensor;
pub use train::{
    accuracy, evaluate_auc, images_to_tensor, predict, train, EpochRecord, LabeledImages,
    OptimizerKind, TrainConfig, TrainReport, Trainer, ABNORMAL,
};
