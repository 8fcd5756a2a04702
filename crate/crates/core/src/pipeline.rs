//! The end-to-end workflow: normalize → transform → dB heatmap → split →
//! train → evaluate, repeated over seeded runs, and the two-arm
//! spectrogram/scalogram comparison built on it.
//!
//! Every random choice of run `r` is derived from the root seed:
//! `derive_seed(root, "split" | "init" | "train", r)`. Both comparison arms
//! therefore see the same splits and the same initial weights.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cnn::{save_weights, train, evaluate_auc, LabeledImages, Model, ModelConfig, TrainConfig, TrainReport};
use crate::cwt::{scalogram_of, CwtConfig, CwtMethod};
use crate::dataset::{
    generate_synthetic_dataset, split_indices, DatasetManifest, Family, LabeledExample, SynthFamilyConfig,
};
use crate::error::{Error, Result};
use crate::metrics::{aggregate_seeded_runs, reference, write_comparison_csv, ComparisonRow, EvalSummary};
use crate::render::{render_db, HeatmapImage, RenderConfig};
use crate::rng::derive_seed;
use crate::signal::{peak_normalize, AudioSignal};
use crate::stft::{spectrogram, StftConfig};
use crate::tf::TfMatrix;

/// Which time-frequency representation feeds the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Spectrogram,
    Scalogram,
}

impl FeatureKind {
    pub const BOTH: [FeatureKind; 2] = [FeatureKind::Spectrogram, FeatureKind::Scalogram];

    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::Spectrogram => "spectrogram",
            FeatureKind::Scalogram => "scalogram",
        }
    }
}

impl std::str::FromStr for FeatureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectrogram" => Ok(FeatureKind::Spectrogram),
            "scalogram" => Ok(FeatureKind::Scalogram),
            _ => Err(Error::InvalidConfig(format!("unknown transform kind {s:?}"))),
        }
    }
}

/// Where a pipeline gets its labeled examples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum DatasetSource {
    Manifest {
        path: PathBuf,
    },
    Synthetic {
        family: Family,
        n_per_class: usize,
        snr_db: Option<f64>,
        #[serde(default)]
        params: SynthFamilyConfig,
    },
}

impl Default for DatasetSource {
    fn default() -> Self {
        DatasetSource::Synthetic {
            family: Family::Stationary,
            n_per_class: 64,
            snr_db: Some(0.0),
            params: SynthFamilyConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub stft: StftConfig,
    pub cwt: CwtConfig,
    pub cwt_method: CwtMethod,
    pub render: RenderConfig,
    pub train: TrainConfig,
    pub dataset: DatasetSource,
    pub runs: usize,
    pub seed: u64,
    pub val_fraction: f64,
    /// Worker threads for the per-example transform and render stage.
    pub jobs: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            stft: StftConfig::default(),
            cwt: CwtConfig::default(),
            cwt_method: CwtMethod::Fft,
            render: RenderConfig {
                width: 64,
                height: 64,
                ..RenderConfig::default()
            },
            train: TrainConfig::default(),
            dataset: DatasetSource::default(),
            runs: 10,
            seed: 0,
            val_fraction: 0.2,
            jobs: 1,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.stft.validate()?;
        self.cwt.validate()?;
        self.train.validate()?;
        self.model_config().validate()?;
        if self.runs == 0 {
            return Err(Error::InvalidConfig("runs must be >= 1".into()));
        }
        if !(self.val_fraction > 0.0 && self.val_fraction < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "validation fraction {} outside (0, 1)",
                self.val_fraction
            )));
        }
        Ok(())
    }

    pub fn model_config(&self) -> ModelConfig {
        ModelConfig::table_one(self.render.height, self.render.width)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Loads or generates the configured dataset.
    pub fn manifest(&self) -> Result<DatasetManifest> {
        let mut manifest = match &self.dataset {
            DatasetSource::Manifest { path } => DatasetManifest::read_jsonl(path, self.seed, self.val_fraction)?,
            DatasetSource::Synthetic {
                family,
                n_per_class,
                snr_db,
                params,
            } => generate_synthetic_dataset(*n_per_class, *family, *snr_db, derive_seed(self.seed, "dataset", 0), params)?,
        };
        manifest.split_seed = self.seed;
        manifest.val_fraction = self.val_fraction;
        Ok(manifest)
    }

    /// Label for report rows: the synthetic family or the machine type.
    pub fn dataset_name(&self, manifest: &DatasetManifest) -> String {
        match &self.dataset {
            DatasetSource::Synthetic { family, .. } => family.name().to_owned(),
            DatasetSource::Manifest { .. } => manifest
                .examples
                .first()
                .map(|e| e.machine_type.name().to_owned())
                .unwrap_or_default(),
        }
    }

    pub fn dataset_snr_db(&self, manifest: &DatasetManifest) -> Option<f64> {
        match &self.dataset {
            DatasetSource::Synthetic { snr_db, .. } => *snr_db,
            DatasetSource::Manifest { .. } => manifest.examples.first().and_then(|e| e.snr_db),
        }
    }
}

/// Time-frequency energy matrix of a peak-normalized signal.
pub fn transform(signal: &AudioSignal, kind: FeatureKind, config: &PipelineConfig) -> Result<TfMatrix> {
    let normalized = peak_normalize(signal)?;
    match kind {
        FeatureKind::Spectrogram => spectrogram(&normalized, &config.stft),
        FeatureKind::Scalogram => scalogram_of(&normalized, &config.cwt, config.cwt_method),
    }
}

/// The classifier input for one signal.
pub fn feature_image(signal: &AudioSignal, kind: FeatureKind, config: &PipelineConfig) -> Result<HeatmapImage> {
    render_db(&transform(signal, kind, config)?, &config.render)
}

/// Maps `f` over `items` on up to `jobs` threads, keeping input order.
pub fn parallel_map<T: Sync, U: Send>(
    items: &[T],
    jobs: usize,
    f: impl Fn(&T) -> Result<U> + Sync,
) -> Result<Vec<U>> {
    let jobs = jobs.clamp(1, items.len().max(1));
    if jobs == 1 {
        return items.iter().map(&f).collect();
    }
    let chunk = items.len().div_ceil(jobs);
    let f = &f;
    std::thread::scope(|scope| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| scope.spawn(move || part.iter().map(f).collect::<Result<Vec<U>>>()))
            .collect();
        let mut out = Vec::with_capacity(items.len());
        for h in handles {
            out.extend(h.join().expect("feature worker panicked")?);
        }
        Ok(out)
    })
}

/// Heatmaps for every example of `manifest`, in manifest order.
pub fn extract_features(manifest: &DatasetManifest, kind: FeatureKind, config: &PipelineConfig) -> Result<LabeledImages> {
    let images = parallel_map(&manifest.examples, config.jobs, |e: &LabeledExample| {
        feature_image(&e.load()?, kind, config)
    })?;
    let classes = manifest.examples.iter().map(|e| e.label.class()).collect();
    LabeledImages::from_heatmaps(&images, classes)
}

/// Seeds of one evaluation run, all derived from the root seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSeeds {
    pub run: u64,
    pub split: u64,
    pub init: u64,
    pub train: u64,
}

impl RunSeeds {
    pub fn derive(root: u64, run: usize) -> Self {
        let r = run as u64;
        Self {
            run: derive_seed(root, "run", r),
            split: derive_seed(root, "split", r),
            init: derive_seed(root, "init", r),
            train: derive_seed(root, "train", r),
        }
    }
}

/// Result of one train/evaluate cycle.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub run: usize,
    pub seeds: RunSeeds,
    pub auc: f64,
    pub model: Model,
    pub report: TrainReport,
}

/// One train/evaluate cycle on precomputed features.
pub fn run_once(
    manifest: &DatasetManifest,
    features: &LabeledImages,
    config: &PipelineConfig,
    run: usize,
) -> Result<RunOutcome> {
    if features.len() != manifest.len() {
        return Err(Error::Shape(format!(
            "{} feature images for {} manifest entries",
            features.len(),
            manifest.len()
        )));
    }
    let seeds = RunSeeds::derive(config.seed, run);
    let run_manifest = DatasetManifest {
        split_seed: seeds.split,
        val_fraction: config.val_fraction,
        ..manifest.clone()
    };
    let (train_idx, val_idx) = split_indices(&run_manifest)?;
    let subset = |idx: &[usize]| {
        LabeledImages::new(
            features.images.gather(idx)?,
            idx.iter().map(|&i| features.classes[i]).collect(),
        )
    };
    let (train_set, val_set) = (subset(&train_idx)?, subset(&val_idx)?);
    let model = Model::build(config.model_config(), seeds.init)?;
    let train_config = TrainConfig {
        seed: seeds.train,
        ..config.train.clone()
    };
    let (model, report) = train(model, &train_set, Some(&val_set), &train_config)?;
    let auc = evaluate_auc(&model, &val_set)?;
    Ok(RunOutcome {
        run,
        seeds,
        auc,
        model,
        report,
    })
}

/// `config.runs` seeded cycles; `on_run` sees each outcome as it finishes.
pub fn evaluate_runs(
    manifest: &DatasetManifest,
    features: &LabeledImages,
    config: &PipelineConfig,
    mut on_run: impl FnMut(&RunOutcome) -> Result<()>,
) -> Result<EvalSummary> {
    config.validate()?;
    let mut aucs = Vec::with_capacity(config.runs);
    let mut seeds = Vec::with_capacity(config.runs);
    for run in 0..config.runs {
        let outcome = run_once(manifest, features, config, run)?;
        on_run(&outcome)?;
        aucs.push(outcome.auc);
        seeds.push(outcome.seeds.run);
    }
    aggregate_seeded_runs(&aucs, &seeds)
}

/// Per-arm outcome of [`compare`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmSummary {
    pub kind: FeatureKind,
    pub summary: EvalSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub dataset: String,
    pub snr_db: Option<f64>,
    pub root_seed: u64,
    pub arms: Vec<ArmSummary>,
    pub rows: Vec<ComparisonRow>,
}

impl CompareReport {
    pub fn mean_auc(&self, kind: FeatureKind) -> Option<f64> {
        self.arms.iter().find(|a| a.kind == kind).map(|a| a.summary.mean_auc)
    }
}

/// Published per-machine AUC closest in character to `dataset`: the
/// stationary family stands in for fan audio and the impulsive family for
/// valve audio.
pub fn paper_reference(dataset: &str, kind: FeatureKind) -> Option<f64> {
    let machine = match dataset {
        "stationary" => "fan",
        "impulsive" => "valve",
        other => other,
    };
    reference::by_machine(machine, kind.name())
}

/// Runs both arms on the same manifest and seeds. Writes into `out_dir`:
///
/// * `manifest.jsonl`
/// * `<arm>/run_NN.tfw` weights and `<arm>/run_NN.report.json`
/// * `<arm>/summary.json`
/// * `comparison.csv` and `compare.json`
pub fn compare(config: &PipelineConfig, out_dir: impl AsRef<Path>) -> Result<CompareReport> {
    config.validate()?;
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let manifest = config.manifest()?;
    manifest.write_jsonl(out_dir.join("manifest.jsonl"))?;
    let dataset = config.dataset_name(&manifest);
    let snr_db = config.dataset_snr_db(&manifest);

    let mut arms = Vec::new();
    let mut rows = Vec::new();
    for kind in FeatureKind::BOTH {
        let arm_dir = out_dir.join(kind.name());
        fs::create_dir_all(&arm_dir).map_err(|e| Error::io(&arm_dir, e))?;
        let features = extract_features(&manifest, kind, config)?;
        let summary = evaluate_runs(&manifest, &features, config, |o| {
            log_run(kind, o);
            save_weights(&o.model, o.seeds.init, arm_dir.join(format!("run_{:02}.tfw", o.run)))?;
            write_json(&arm_dir.join(format!("run_{:02}.report.json", o.run)), &o.report)
        })?;
        write_json(&arm_dir.join("summary.json"), &summary)?;
        rows.push(ComparisonRow {
            config: kind.name().to_owned(),
            machine_or_family: dataset.clone(),
            snr_db,
            mean_auc: summary.mean_auc,
            paper_reference_auc: paper_reference(&dataset, kind),
        });
        arms.push(ArmSummary { kind, summary });
    }
    let csv_path = out_dir.join("comparison.csv");
    let file = fs::File::create(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
    write_comparison_csv(&rows, file)?;
    let report = CompareReport {
        dataset,
        snr_db,
        root_seed: config.seed,
        arms,
        rows,
    };
    write_json(&out_dir.join("compare.json"), &report)?;
    Ok(report)
}

fn log_run(kind: FeatureKind, o: &RunOutcome) {
    let last = o.report.epochs.last();
    eprintln!(
        "[{}] run {:02}: auc {:.4}, final loss {:.4}, train accuracy {:.3}{}",
        kind.name(),
        o.run,
        o.auc,
        last.map_or(f64::NAN, |e| e.loss),
        last.map_or(f64::NAN, |e| e.train_accuracy),
        o.report
            .diverged
            .as_deref()
            .map(|d| format!(", diverged at {d}"))
            .unwrap_or_default()
    );
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
