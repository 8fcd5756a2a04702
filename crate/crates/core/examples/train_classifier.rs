//! Train the CNN on scalogram images of the impulsive family and report
//! per-epoch loss, accuracy and validation AUC.
//!
//! ```text
//! cargo run --release --example train_classifier [epochs]
//! ```

use tfscope::cnn::{predict, save_weights, train, LabeledImages, Model, TrainConfig};
use tfscope::dataset::{generate_synthetic_dataset, split, Family, SynthFamilyConfig};
use tfscope::pipeline::{extract_features, FeatureKind, PipelineConfig};

fn main() -> tfscope::Result<()> {
    let epochs = std::env::args().nth(1).map_or(8, |s| s.parse().expect("epochs must be an integer"));
    let config = PipelineConfig::default();
    let manifest = generate_synthetic_dataset(24, Family::Impulsive, Some(6.0), 5, &SynthFamilyConfig::default())?;
    let (train_m, val_m) = split(&manifest)?;
    let train_set: LabeledImages = extract_features(&train_m, FeatureKind::Scalogram, &config)?;
    let val_set = extract_features(&val_m, FeatureKind::Scalogram, &config)?;

    let model = Model::build(config.model_config(), 1)?;
    println!("{} parameters", model.num_params());
    let train_config = TrainConfig { epochs, seed: 2, ..TrainConfig::default() };
    let (model, report) = train(model, &train_set, Some(&val_set), &train_config)?;
    for e in &report.epochs {
        println!(
            "epoch {:2}  loss {:.4}  train accuracy {:.3}  validation auc {:.3}",
            e.epoch,
            e.loss,
            e.train_accuracy,
            e.validation_auc.unwrap_or(f64::NAN)
        );
    }

    let scores = predict(&model, &val_set.images)?;
    println!("first validation scores: {:?}", &scores[..4.min(scores.len())]);
    save_weights(&model, 1, "target/train_classifier.tfw")?;
    println!("weights in target/train_classifier.tfw");
    Ok(())
}
