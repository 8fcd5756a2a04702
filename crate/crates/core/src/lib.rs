//! Spectrogram and scalogram feature extraction for acoustic anomaly
//! detection, with a from-scratch CNN classifier, AUC-ROC evaluation and a
//! transform-cost benchmark.

pub mod bench;
pub mod cli;
pub mod cnn;
pub mod cwt;
pub mod dataset;
pub mod demo;
pub mod error;
pub mod metrics;
pub mod pipeline;
pub mod render;
pub mod rng;
pub mod signal;
pub mod stft;
pub mod tf;

pub use error::{Error, Result};
