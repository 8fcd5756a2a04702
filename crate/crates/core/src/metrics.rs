//! AUC-ROC and multi-run aggregation.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scores with binary labels, `true` = abnormal (positive).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredLabels {
    scores: Vec<f64>,
    labels: Vec<bool>,
}

impl ScoredLabels {
    pub fn new(scores: Vec<f64>, labels: Vec<bool>) -> Result<Self> {
        if scores.len() != labels.len() {
            return Err(Error::Metric(format!(
                "{} scores for {} labels",
                scores.len(),
                labels.len()
            )));
        }
        if scores.iter().any(|s| s.is_nan()) {
            return Err(Error::Metric("NaN score".into()));
        }
        Ok(Self { scores, labels })
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    fn class_counts(&self) -> Result<(usize, usize)> {
        let pos = self.labels.iter().filter(|l| **l).count();
        let neg = self.labels.len() - pos;
        if pos == 0 || neg == 0 {
            return Err(Error::Metric(
                "AUC needs at least one example of each label".into(),
            ));
        }
        Ok((pos, neg))
    }
}

/// Trapezoidal area under the ROC curve. Equal scores form one threshold
/// step, which is equivalent to counting tied pairs as one half.
pub fn auc_trapezoid(data: &ScoredLabels) -> Result<f64> {
    let (pos, neg) = data.class_counts()?;
    let mut order: Vec<usize> = (0..data.scores.len()).collect();
    order.sort_by(|&a, &b| data.scores[b].total_cmp(&data.scores[a]));

    let (mut tp, mut fp) = (0usize, 0usize);
    let mut area = 0.0;
    let mut i = 0;
    while i < order.len() {
        let s = data.scores[order[i]];
        let (tp0, fp0) = (tp, fp);
        while i < order.len() && data.scores[order[i]] == s {
            if data.labels[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        area += (fp - fp0) as f64 * (tp + tp0) as f64 / 2.0;
    }
    Ok(area / (pos as f64 * neg as f64))
}

/// Probability that a random positive outscores a random negative, ties
/// counting one half. Exact enumeration over all pairs.
pub fn auc_pairwise(data: &ScoredLabels) -> Result<f64> {
    let (pos, neg) = data.class_counts()?;
    let positives: Vec<f64> = data.scores.iter().zip(&data.labels).filter(|p| *p.1).map(|p| *p.0).collect();
    let negatives: Vec<f64> = data.scores.iter().zip(&data.labels).filter(|p| !*p.1).map(|p| *p.0).collect();
    let mut wins = 0.0;
    for p in &positives {
        for n in &negatives {
            if p > n {
                wins += 1.0;
            } else if p == n {
                wins += 0.5;
            }
        }
    }
    Ok(wins / (pos as f64 * neg as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub per_run_auc: Vec<f64>,
    pub mean_auc: f64,
    pub run_seeds: Vec<u64>,
}

pub fn aggregate_runs(aucs: &[f64]) -> Result<EvalSummary> {
    aggregate_seeded_runs(aucs, &[])
}

/// Like [`aggregate_runs`], recording the seed of each run.
pub fn aggregate_seeded_runs(aucs: &[f64], seeds: &[u64]) -> Result<EvalSummary> {
    if aucs.is_empty() {
        return Err(Error::Metric("no runs to aggregate".into()));
    }
    if !seeds.is_empty() && seeds.len() != aucs.len() {
        return Err(Error::Metric(format!("{} seeds for {} runs", seeds.len(), aucs.len())));
    }
    Ok(EvalSummary {
        per_run_auc: aucs.to_vec(),
        mean_auc: aucs.iter().sum::<f64>() / aucs.len() as f64,
        run_seeds: seeds.to_vec(),
    })
}

/// Published mean AUC-ROC values, kept only for side-by-side reporting.
pub mod reference {
    /// `(snr_db, baseline, scalogram, spectrogram)`.
    pub const AUC_BY_SNR: [(f64, f64, f64, f64); 3] = [
        (-6.0, 0.893, 0.921, 0.981),
        (0.0, 0.942, 0.964, 0.992),
        (6.0, 0.975, 0.988, 0.997),
    ];

    /// `(machine, scalogram, spectrogram)`.
    pub const AUC_BY_MACHINE: [(&str, f64, f64); 4] = [
        ("fan", 0.934, 0.988),
        ("pump", 0.962, 0.991),
        ("slider", 0.947, 0.995),
        ("valve", 0.987, 0.984),
    ];

    pub fn by_snr(snr_db: f64, arm: &str) -> Option<f64> {
        AUC_BY_SNR.iter().find(|r| r.0 == snr_db).and_then(|r| match arm {
            "baseline" => Some(r.1),
            "scalogram" => Some(r.2),
            "spectrogram" => Some(r.3),
            _ => None,
        })
    }

    pub fn by_machine(machine: &str, arm: &str) -> Option<f64> {
        AUC_BY_MACHINE.iter().find(|r| r.0 == machine).and_then(|r| match arm {
            "scalogram" => Some(r.1),
            "spectrogram" => Some(r.2),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub config: String,
    pub machine_or_family: String,
    pub snr_db: Option<f64>,
    pub mean_auc: f64,
    pub paper_reference_auc: Option<f64>,
}

/// Writes rows as CSV with a header line.
pub fn write_comparison_csv<W: Write>(rows: &[ComparisonRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}
