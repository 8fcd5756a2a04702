//! Generate a balanced synthetic dataset, split it and save the manifests.
//!
//! ```text
//! cargo run --release --example synthetic_dataset [stationary|impulsive] [snr_db]
//! ```

use tfscope::dataset::{generate_synthetic_dataset, split, Family, Label, SynthFamilyConfig};

fn main() -> tfscope::Result<()> {
    let mut args = std::env::args().skip(1);
    let family: Family = args.next().as_deref().unwrap_or("impulsive").parse()?;
    let snr_db: f64 = args.next().map_or(Ok(0.0), |s| s.parse()).expect("snr_db must be a number");

    let manifest = generate_synthetic_dataset(10, family, Some(snr_db), 42, &SynthFamilyConfig::default())?;
    let (train, val) = split(&manifest)?;
    for (name, part) in [("train", &train), ("validation", &val)] {
        println!(
            "{name:10} {:2} examples ({} normal, {} abnormal)",
            part.len(),
            part.count(Label::Normal),
            part.count(Label::Abnormal)
        );
    }

    let first = manifest.examples[0].load()?;
    println!("{} samples at {} Hz, peak {:.3}", first.len(), first.sample_rate_hz(), first.peak());

    let dir = std::path::Path::new("target/synthetic_dataset");
    std::fs::create_dir_all(dir).map_err(|e| tfscope::Error::io(dir, e))?;
    train.write_jsonl(dir.join("train.jsonl"))?;
    val.write_jsonl(dir.join("val.jsonl"))?;
    println!("manifests in {}", dir.display());
    Ok(())
}
