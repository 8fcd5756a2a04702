//! Render the spectrogram and scalogram of a machine-like signal as dB
//! heatmaps, as fed to the classifier.
//!
//! ```text
//! cargo run --release --example render_heatmaps [out_dir]
//! ```

use std::path::PathBuf;

use tfscope::dataset::{generate_synthetic_dataset, Family, Label, SynthFamilyConfig};
use tfscope::pipeline::{feature_image, FeatureKind, PipelineConfig};
use tfscope::render::RenderConfig;

fn main() -> tfscope::Result<()> {
    let out_dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "target/render_heatmaps".into()));
    std::fs::create_dir_all(&out_dir).map_err(|e| tfscope::Error::io(&out_dir, e))?;
    let config = PipelineConfig {
        render: RenderConfig { width: 256, height: 256, ..RenderConfig::default() },
        ..PipelineConfig::default()
    };
    for family in [Family::Stationary, Family::Impulsive] {
        let manifest = generate_synthetic_dataset(2, family, Some(6.0), 3, &SynthFamilyConfig::default())?;
        for label in [Label::Normal, Label::Abnormal] {
            let example = manifest.examples.iter().find(|e| e.label == label).unwrap();
            let signal = example.load()?;
            for kind in FeatureKind::BOTH {
                let path = out_dir.join(format!("{}_{:?}_{}.png", family.name(), label, kind.name()).to_lowercase());
                feature_image(&signal, kind, &config)?.write_png(&path)?;
                println!("wrote {}", path.display());
            }
        }
    }
    Ok(())
}
