//! Time spectrogram and scalogram generation on 10 s of audio and print
//! the ratio next to the published single-file timings.
//!
//! ```text
//! cargo run --release --example bench_transforms [repeats]
//! ```

use tfscope::bench::{bench_report, time_transform, BenchConfig, MIMII_FILE_COUNT};
use tfscope::cli::default_bench_signal;
use tfscope::cwt::CwtConfig;
use tfscope::pipeline::FeatureKind;

fn main() -> tfscope::Result<()> {
    let repeats = std::env::args().nth(1).map_or(3, |s| s.parse().expect("repeats must be an integer"));
    let signal = default_bench_signal()?;
    let config = BenchConfig { repeats, ..BenchConfig::default() };
    let mut results = vec![time_transform(FeatureKind::Spectrogram, &signal, &config)?];
    for step in [1, 64, 512] {
        let cfg = BenchConfig { cwt: CwtConfig { translation_step: step, ..config.cwt }, ..config.clone() };
        results.push(time_transform(FeatureKind::Scalogram, &signal, &cfg)?);
    }
    let report = bench_report(&results, MIMII_FILE_COUNT)?;
    for (r, e) in report.results.iter().zip(&report.extrapolations) {
        println!("{:34} median {:8.4} s   whole corpus {:10.0} s", r.label, r.median_s, e.total_s);
    }
    for q in &report.ratios {
        println!("{} / {} = {:.1}", q.numerator, q.denominator, q.ratio);
    }
    println!("published ratio: {:.1}", report.reference.single_ratio);
    report.write_csv(std::io::stdout())?;
    Ok(())
}
