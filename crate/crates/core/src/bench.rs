//! Wall-clock cost of spectrogram and scalogram generation, reported in
//! the single-file / whole-dataset layout of the published comparison.

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cwt::{scalogram_of, CwtConfig, CwtMethod};
use crate::error::{Error, Result};
use crate::pipeline::FeatureKind;
use crate::signal::AudioSignal;
use crate::stft::{spectrogram, StftConfig};

/// Number of files in the full MIMII corpus at one SNR level.
pub const MIMII_FILE_COUNT: usize = 18_019;

/// Published timings (seconds) kept for side-by-side reporting only.
pub mod reference {
    pub const SPECTROGRAM_SINGLE_S: f64 = 0.58;
    pub const SCALOGRAM_SINGLE_S: f64 = 22.38;
    pub const SPECTROGRAM_DATASET_S: f64 = 10_451.02;
    pub const SCALOGRAM_DATASET_S: f64 = 392_814.22;
    /// The whole-dataset deviation as printed, which repeats the scalogram
    /// total instead of the difference.
    pub const DATASET_DEVIATION_AS_PRINTED_S: f64 = 392_814.2;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub stft: StftConfig,
    pub cwt: CwtConfig,
    /// `Direct` evaluates every coefficient, which is the per-sample cost
    /// the comparison is about and makes cost scale with the step.
    pub cwt_method: CwtMethod,
    pub repeats: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            stft: StftConfig::default(),
            cwt: CwtConfig::default(),
            cwt_method: CwtMethod::Direct,
            repeats: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub label: String,
    pub signal_length: usize,
    pub repeats: usize,
    pub times_s: Vec<f64>,
    pub median_s: f64,
    pub mean_s: f64,
}

impl BenchResult {
    pub fn from_times(label: impl Into<String>, signal_length: usize, times_s: Vec<f64>) -> Result<Self> {
        if times_s.len() < 3 {
            return Err(Error::InvalidConfig(format!(
                "a benchmark needs at least 3 repeats, got {}",
                times_s.len()
            )));
        }
        let mut sorted = times_s.clone();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let median_s = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
        };
        Ok(Self {
            label: label.into(),
            signal_length,
            repeats: n,
            mean_s: times_s.iter().sum::<f64>() / n as f64,
            times_s,
            median_s,
        })
    }
}

/// Label used for a transform in reports, e.g. `scalogram[step=8]`.
pub fn transform_label(kind: FeatureKind, config: &BenchConfig) -> String {
    match kind {
        FeatureKind::Spectrogram => format!(
            "spectrogram[n={},hop={}]",
            config.stft.frame_size_n, config.stft.hop_size_h
        ),
        FeatureKind::Scalogram => format!(
            "scalogram[scales={}-{},step={}]",
            config.cwt.scale_min, config.cwt.scale_max, config.cwt.translation_step
        ),
    }
}

/// Times transform plus energy computation, after one discarded warmup.
pub fn time_transform(kind: FeatureKind, signal: &AudioSignal, config: &BenchConfig) -> Result<BenchResult> {
    if config.repeats < 3 {
        return Err(Error::InvalidConfig(format!(
            "a benchmark needs at least 3 repeats, got {}",
            config.repeats
        )));
    }
    let run = || -> Result<usize> {
        let m = match kind {
            FeatureKind::Spectrogram => spectrogram(signal, &config.stft)?,
            FeatureKind::Scalogram => scalogram_of(signal, &config.cwt, config.cwt_method)?,
        };
        Ok(m.values().len())
    };
    std::hint::black_box(run()?);
    let mut times = Vec::with_capacity(config.repeats);
    for _ in 0..config.repeats {
        let start = Instant::now();
        std::hint::black_box(run()?);
        times.push(start.elapsed().as_secs_f64());
    }
    BenchResult::from_times(transform_label(kind, config), signal.len(), times)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub numerator: String,
    pub denominator: String,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub label: String,
    pub median_s: f64,
    pub file_count: usize,
    pub total_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaperReference {
    pub spectrogram_single_s: f64,
    pub scalogram_single_s: f64,
    pub single_ratio: f64,
    pub spectrogram_dataset_s: f64,
    pub scalogram_dataset_s: f64,
    pub dataset_deviation_as_printed_s: f64,
    pub dataset_deviation_by_subtraction_s: f64,
    pub note: String,
}

impl Default for PaperReference {
    fn default() -> Self {
        use reference::*;
        Self {
            spectrogram_single_s: SPECTROGRAM_SINGLE_S,
            scalogram_single_s: SCALOGRAM_SINGLE_S,
            single_ratio: SCALOGRAM_SINGLE_S / SPECTROGRAM_SINGLE_S,
            spectrogram_dataset_s: SPECTROGRAM_DATASET_S,
            scalogram_dataset_s: SCALOGRAM_DATASET_S,
            dataset_deviation_as_printed_s: DATASET_DEVIATION_AS_PRINTED_S,
            dataset_deviation_by_subtraction_s: SCALOGRAM_DATASET_S - SPECTROGRAM_DATASET_S,
            note: "the printed whole-dataset deviation repeats the scalogram total; \
                   the difference of the two totals is reported alongside it"
                .into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub results: Vec<BenchResult>,
    /// Every result's median over the first result's median.
    pub ratios: Vec<RatioRow>,
    pub extrapolations: Vec<Extrapolation>,
    pub reference: PaperReference,
}

impl BenchReport {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// One `result` row per benchmark followed by one `ratio` row per ratio.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        #[derive(Serialize)]
        struct Row<'a> {
            section: &'a str,
            label: String,
            signal_length: Option<usize>,
            repeats: Option<usize>,
            median_s: Option<f64>,
            mean_s: Option<f64>,
            extrapolated_dataset_s: Option<f64>,
            ratio: Option<f64>,
        }
        let mut w = csv::Writer::from_writer(out);
        for (r, e) in self.results.iter().zip(&self.extrapolations) {
            w.serialize(Row {
                section: "result",
                label: r.label.clone(),
                signal_length: Some(r.signal_length),
                repeats: Some(r.repeats),
                median_s: Some(r.median_s),
                mean_s: Some(r.mean_s),
                extrapolated_dataset_s: Some(e.total_s),
                ratio: None,
            })?;
        }
        for q in &self.ratios {
            w.serialize(Row {
                section: "ratio",
                label: format!("{}/{}", q.numerator, q.denominator),
                signal_length: None,
                repeats: None,
                median_s: None,
                mean_s: None,
                extrapolated_dataset_s: None,
                ratio: Some(q.ratio),
            })?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))
    }
}

/// Ratios against the first result and `median × file_count` totals.
pub fn bench_report(results: &[BenchResult], file_count: usize) -> Result<BenchReport> {
    let Some(base) = results.first() else {
        return Err(Error::InvalidConfig("no benchmark results to report".into()));
    };
    let ratios = results[1..]
        .iter()
        .map(|r| RatioRow {
            numerator: r.label.clone(),
            denominator: base.label.clone(),
            ratio: r.median_s / base.median_s,
        })
        .collect();
    let extrapolations = results
        .iter()
        .map(|r| Extrapolation {
            label: r.label.clone(),
            median_s: r.median_s,
            file_count,
            total_s: r.median_s * file_count as f64,
        })
        .collect();
    Ok(BenchReport {
        results: results.to_vec(),
        ratios,
        extrapolations,
        reference: PaperReference::default(),
    })
}
