//! Both feature arms on the same synthetic data, splits and seeds.
//!
//! ```text
//! cargo run --release --example compare_pipeline [stationary|impulsive] [runs] [epochs]
//! ```
//!
//! The defaults keep the run short; raise `runs` to 10 and `epochs` to 20
//! for the full protocol.

use tfscope::dataset::{Family, SynthFamilyConfig};
use tfscope::pipeline::{compare, DatasetSource, PipelineConfig};

fn main() -> tfscope::Result<()> {
    let mut args = std::env::args().skip(1);
    let family: Family = args.next().as_deref().unwrap_or("impulsive").parse()?;
    let runs = args.next().map_or(2, |s| s.parse().expect("runs must be an integer"));
    let epochs = args.next().map_or(6, |s| s.parse().expect("epochs must be an integer"));

    let mut config = PipelineConfig {
        dataset: DatasetSource::Synthetic {
            family,
            n_per_class: 32,
            snr_db: Some(0.0),
            params: SynthFamilyConfig::default(),
        },
        runs,
        seed: 17,
        ..PipelineConfig::default()
    };
    config.train.epochs = epochs;
    let out = format!("target/compare_pipeline/{}", family.name());
    let report = compare(&config, &out)?;
    for arm in &report.arms {
        println!("{:12} mean auc {:.4}  per run {:?}", arm.kind.name(), arm.summary.mean_auc, arm.summary.per_run_auc);
    }
    println!("artifacts in {out}");
    Ok(())
}
