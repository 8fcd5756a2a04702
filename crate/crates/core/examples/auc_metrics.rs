//! AUC-ROC by the trapezoid rule and by pairwise counting, plus run
//! aggregation.
//!
//! ```text
//! cargo run --example auc_metrics
//! ```

use tfscope::metrics::{aggregate_runs, auc_pairwise, auc_trapezoid, reference, ScoredLabels};

fn main() -> tfscope::Result<()> {
    // abnormal = true; one abnormal example ties with a normal one
    let data = ScoredLabels::new(
        vec![0.95, 0.80, 0.55, 0.55, 0.30, 0.10],
        vec![true, true, true, false, false, false],
    )?;
    println!("trapezoid {:.4}", auc_trapezoid(&data)?);
    println!("pairwise  {:.4}", auc_pairwise(&data)?);

    let summary = aggregate_runs(&[0.91, 0.94, 0.89, 0.93])?;
    println!("mean over {} runs: {:.4}", summary.per_run_auc.len(), summary.mean_auc);

    println!("published mean AUC by SNR (baseline, scalogram, spectrogram):");
    for (snr, base, scal, spec) in reference::AUC_BY_SNR {
        println!("  {snr:+} dB: {base:.3} {scal:.3} {spec:.3}");
    }
    Ok(())
}
