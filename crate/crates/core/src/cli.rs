//! Command-line front end. Every subcommand reads an optional pipeline
//! config (JSON, `--config` or `$TFSCOPE_CONFIG`) and lets flags override
//! individual values.
//!
//! Exit status: 0 on success, 1 when the pipeline fails, 2 on bad usage.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;

use crate::bench::{bench_report, time_transform, BenchConfig, MIMII_FILE_COUNT};
use crate::cnn::{save_weights, train, LabeledImages, Model, TrainConfig};
use crate::cwt::{CwtConfig, CwtMethod};
use crate::dataset::{
    generate_synthetic_dataset, split, DatasetManifest, Family, LabeledExample, Source, SynthFamilyConfig,
};
use crate::demo::{run_resolution_demo, write_resolution_demo, DemoConfig};
use crate::error::{Error, Result};
use crate::pipeline::{
    compare, evaluate_runs, extract_features, transform, write_json, DatasetSource, FeatureKind, PipelineConfig,
};
use crate::render::render_db;
use crate::rng::derive_seed;
use crate::signal::{load_wav, peak_normalize, synthesize, write_wav, AudioSignal, SynthKind, SynthSpec};
use crate::stft::StftConfig;
use crate::tf::{read_tfm, write_tfm, TfMatrix};

/// Environment variable naming a default pipeline config file.
pub const CONFIG_ENV: &str = "TFSCOPE_CONFIG";

#[derive(Debug, Parser)]
#[command(name = "tfscope", version, about = "Spectrogram and scalogram features for machine-sound anomaly detection")]
pub struct Cli {
    /// Pipeline config file (JSON); flags override its values.
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Peak-normalize a WAV file.
    Normalize {
        input: PathBuf,
        output: PathBuf,
    },
    /// Spectrogram or scalogram of a WAV file, written as TFM plus sidecar.
    Transform {
        #[arg(long, value_parser = parse_kind)]
        kind: FeatureKind,
        input: PathBuf,
        /// Output path; defaults to the input with a `.tfm` extension.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Skip peak normalization.
        #[arg(long)]
        raw: bool,
        #[command(flatten)]
        stft: StftArgs,
        #[command(flatten)]
        cwt: CwtArgs,
    },
    /// Render a TFM matrix as a dB heatmap PNG.
    Render {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        render: RenderArgs,
    },
    /// Synthesize one signal from a spec, or a labeled dataset with manifest.
    Synth {
        /// SynthSpec JSON file; writes a single WAV to `--out`.
        #[arg(long, conflicts_with = "family")]
        spec: Option<PathBuf>,
        #[arg(long, value_parser = parse_family)]
        family: Option<Family>,
        #[arg(long, default_value_t = 64)]
        n_per_class: usize,
        #[arg(long, allow_negative_numbers = true)]
        snr_db: Option<f64>,
        #[arg(long)]
        duration_s: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// WAV path with `--spec`, output directory with `--family`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Stratified train/validation split of a manifest.
    Split {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        val_fraction: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Train the classifier on one manifest.
    Train {
        #[arg(long)]
        manifest: PathBuf,
        /// Validation manifest for per-epoch AUC.
        #[arg(long)]
        val_manifest: Option<PathBuf>,
        #[arg(long, value_parser = parse_kind)]
        kind: FeatureKind,
        /// Weights output path.
        #[arg(long)]
        out: PathBuf,
        /// Training report JSON; defaults next to the weights.
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Repeated seeded train/evaluate cycles; writes an EvalSummary.
    Evaluate {
        #[command(flatten)]
        dataset: DatasetArgs,
        #[arg(long, value_parser = parse_kind)]
        kind: FeatureKind,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Time spectrogram and scalogram generation.
    Bench {
        /// `spectrogram`, `scalogram` or `both`.
        #[arg(long, default_value = "both")]
        kind: String,
        /// WAV to time; defaults to 10 s of synthetic machine sound.
        #[arg(long)]
        signal: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
        /// Scalogram translation steps to time, comma separated.
        #[arg(long, value_delimiter = ',')]
        steps: Option<Vec<usize>>,
        #[arg(long, value_parser = parse_enum::<CwtMethod>)]
        method: Option<CwtMethod>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        stft: StftArgs,
    },
    /// Two tones and two impulses under three representations, with verdict.
    DemoResolution {
        #[arg(long)]
        out: PathBuf,
    },
    /// Both feature arms on the same data, splits and seeds.
    Compare {
        #[command(flatten)]
        dataset: DatasetArgs,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Args, Default)]
pub struct StftArgs {
    /// STFT frame size N.
    #[arg(long)]
    pub n: Option<usize>,
    /// STFT hop size H (defaults to N/2 when only N is given).
    #[arg(long)]
    pub hop: Option<usize>,
    #[arg(long, value_parser = parse_enum::<crate::stft::WindowKind>)]
    pub window: Option<crate::stft::WindowKind>,
}

#[derive(Debug, Args, Default)]
pub struct CwtArgs {
    #[arg(long)]
    pub scale_min: Option<u32>,
    #[arg(long)]
    pub scale_max: Option<u32>,
    /// CWT translation step in samples.
    #[arg(long)]
    pub step: Option<usize>,
    #[arg(long)]
    pub omega0: Option<f64>,
    #[arg(long, value_parser = parse_enum::<CwtMethod>)]
    pub cwt_method: Option<CwtMethod>,
}

#[derive(Debug, Args, Default)]
pub struct RenderArgs {
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub height: Option<usize>,
    #[arg(long)]
    pub floor_db: Option<f64>,
    #[arg(long, value_parser = parse_enum::<crate::render::Resample>)]
    pub resample: Option<crate::render::Resample>,
}

#[derive(Debug, Args, Default)]
pub struct TrainArgs {
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long, value_parser = parse_enum::<crate::cnn::OptimizerKind>)]
    pub optimizer: Option<crate::cnn::OptimizerKind>,
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub runs: Option<usize>,
    /// Worker threads for transform and render.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub val_fraction: Option<f64>,
    #[command(flatten)]
    pub stft: StftArgs,
    #[command(flatten)]
    pub cwt: CwtArgs,
    #[command(flatten)]
    pub render: RenderArgs,
    #[command(flatten)]
    pub train: TrainArgs,
}

/// A manifest file, or a synthetic family generated on the fly.
#[derive(Debug, Args, Default)]
pub struct DatasetArgs {
    #[arg(long, conflicts_with = "family")]
    pub manifest: Option<PathBuf>,
    #[arg(long, value_parser = parse_family)]
    pub family: Option<Family>,
    #[arg(long)]
    pub n_per_class: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub snr_db: Option<f64>,
    #[arg(long)]
    pub duration_s: Option<f64>,
}

fn parse_kind(s: &str) -> std::result::Result<FeatureKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_family(s: &str) -> std::result::Result<Family, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Parses a snake_case enum through its serde representation.
fn parse_enum<T: DeserializeOwned>(s: &str) -> std::result::Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_owned())).map_err(|_| format!("unrecognized value {s:?}"))
}

impl StftArgs {
    fn apply(&self, c: &mut StftConfig) {
        if let Some(n) = self.n {
            *c = StftConfig {
                window: c.window,
                center_pad: c.center_pad,
                ..StftConfig::with_frame(n)
            };
        }
        if let Some(h) = self.hop {
            c.hop_size_h = h;
        }
        if let Some(w) = self.window {
            c.window = w;
        }
    }
}

impl CwtArgs {
    fn apply(&self, c: &mut CwtConfig, method: &mut CwtMethod) {
        if let Some(v) = self.scale_min {
            c.scale_min = v;
        }
        if let Some(v) = self.scale_max {
            c.scale_max = v;
        }
        if let Some(v) = self.step {
            c.translation_step = v;
        }
        if let Some(v) = self.omega0 {
            c.omega0 = v;
        }
        if let Some(m) = self.cwt_method {
            *method = m;
        }
    }
}

impl RenderArgs {
    fn apply(&self, c: &mut crate::render::RenderConfig) {
        if let Some(v) = self.width {
            c.width = v;
        }
        if let Some(v) = self.height {
            c.height = v;
        }
        if let Some(v) = self.floor_db {
            c.floor_db = v;
        }
        if let Some(v) = self.resample {
            c.resample = v;
        }
    }
}

impl TrainArgs {
    fn apply(&self, c: &mut TrainConfig) {
        if let Some(v) = self.epochs {
            c.epochs = v;
        }
        if let Some(v) = self.batch_size {
            c.batch_size = v;
        }
        if let Some(v) = self.lr {
            c.learning_rate = v;
        }
        if let Some(v) = self.optimizer {
            c.optimizer = v;
        }
    }
}

impl CommonArgs {
    fn apply(&self, c: &mut PipelineConfig) {
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.runs {
            c.runs = v;
        }
        if let Some(v) = self.jobs {
            c.jobs = v;
        }
        if let Some(v) = self.val_fraction {
            c.val_fraction = v;
        }
        self.stft.apply(&mut c.stft);
        self.cwt.apply(&mut c.cwt, &mut c.cwt_method);
        self.render.apply(&mut c.render);
        self.train.apply(&mut c.train);
    }
}

impl DatasetArgs {
    fn apply(&self, c: &mut PipelineConfig) {
        if let Some(path) = &self.manifest {
            c.dataset = DatasetSource::Manifest { path: path.clone() };
            return;
        }
        let touched = self.family.is_some() || self.n_per_class.is_some() || self.snr_db.is_some() || self.duration_s.is_some();
        if !touched {
            return;
        }
        let (mut family, mut n, mut snr, mut params) = match &c.dataset {
            DatasetSource::Synthetic {
                family,
                n_per_class,
                snr_db,
                params,
            } => (*family, *n_per_class, *snr_db, params.clone()),
            DatasetSource::Manifest { .. } => (Family::Stationary, 64, Some(0.0), SynthFamilyConfig::default()),
        };
        if let Some(f) = self.family {
            family = f;
        }
        if let Some(v) = self.n_per_class {
            n = v;
        }
        if let Some(v) = self.snr_db {
            snr = Some(v);
        }
        if let Some(v) = self.duration_s {
            params.duration_s = v;
        }
        c.dataset = DatasetSource::Synthetic {
            family,
            n_per_class: n,
            snr_db: snr,
            params,
        };
    }
}

fn load_config(path: Option<&Path>) -> Result<PipelineConfig> {
    match path {
        Some(p) => PipelineConfig::from_json_file(p),
        None => Ok(PipelineConfig::default()),
    }
}

fn log(msg: impl AsRef<str>) {
    eprintln!("tfscope: {}", msg.as_ref());
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Executes a parsed command.
pub fn execute(cli: Cli) -> Result<()> {
    let mut config = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Normalize { input, output } => {
            let x = peak_normalize(&load_wav(&input)?)?;
            write_wav(&x, &output)?;
            log(format!("wrote {}", output.display()));
        }
        Command::Transform {
            kind,
            input,
            out,
            raw,
            stft,
            cwt,
        } => {
            stft.apply(&mut config.stft);
            cwt.apply(&mut config.cwt, &mut config.cwt_method);
            let x = load_wav(&input)?;
            let m = if raw {
                raw_transform(&x, kind, &config)?
            } else {
                transform(&x, kind, &config)?
            };
            let out = out.unwrap_or_else(|| input.with_extension("tfm"));
            let echo = match kind {
                FeatureKind::Spectrogram => serde_json::to_value(config.stft)?,
                FeatureKind::Scalogram => serde_json::json!({ "cwt": config.cwt, "method": config.cwt_method }),
            };
            write_tfm(&m, &out, echo)?;
            log(format!("wrote {} ({}x{})", out.display(), m.rows(), m.cols()));
        }
        Command::Render { input, out, render } => {
            render.apply(&mut config.render);
            let (m, _) = read_tfm(&input)?;
            let out = out.unwrap_or_else(|| input.with_extension("png"));
            render_db(&m, &config.render)?.write_png(&out)?;
            log(format!("wrote {}", out.display()));
        }
        Command::Synth {
            spec,
            family,
            n_per_class,
            snr_db,
            duration_s,
            seed,
            out,
        } => match (spec, family) {
            (Some(spec_path), None) => {
                let text = fs::read_to_string(&spec_path).map_err(|e| Error::io(&spec_path, e))?;
                let mut spec: SynthSpec = serde_json::from_str(&text)?;
                if let Some(s) = seed {
                    spec.seed = s;
                }
                let x = synthesize(&spec, crate::dataset::DEFAULT_SAMPLE_RATE_HZ)?;
                write_wav(&x, &out)?;
                log(format!("wrote {}", out.display()));
            }
            (None, Some(family)) => {
                let params = SynthFamilyConfig {
                    duration_s: duration_s.unwrap_or(SynthFamilyConfig::default().duration_s),
                    ..SynthFamilyConfig::default()
                };
                let seed = seed.unwrap_or(config.seed);
                let synth = generate_synthetic_dataset(n_per_class, family, snr_db, seed, &params)?;
                let written = materialize(&synth, &out)?;
                log(format!("wrote {} WAVs and {}", written.len(), out.join("manifest.jsonl").display()));
            }
            _ => {
                return Err(Error::InvalidConfig("synth needs exactly one of --spec or --family".into()));
            }
        },
        Command::Split {
            manifest,
            val_fraction,
            seed,
            out_dir,
        } => {
            let m = DatasetManifest::read_jsonl(
                &manifest,
                seed.unwrap_or(config.seed),
                val_fraction.unwrap_or(config.val_fraction),
            )?;
            let (train_m, val_m) = split(&m)?;
            create_dir(&out_dir)?;
            train_m.write_jsonl(out_dir.join("train.jsonl"))?;
            val_m.write_jsonl(out_dir.join("val.jsonl"))?;
            log(format!("train {} / validation {} examples", train_m.len(), val_m.len()));
        }
        Command::Train {
            manifest,
            val_manifest,
            kind,
            out,
            report,
            common,
        } => {
            common.apply(&mut config);
            config.validate()?;
            let train_m = DatasetManifest::read_jsonl(&manifest, config.seed, config.val_fraction)?;
            let train_set = extract_features(&train_m, kind, &config)?;
            let val_set = match &val_manifest {
                Some(p) => Some(extract_features(
                    &DatasetManifest::read_jsonl(p, config.seed, config.val_fraction)?,
                    kind,
                    &config,
                )?),
                None => None,
            };
            let init_seed = derive_seed(config.seed, "init", 0);
            let model = Model::build(config.model_config(), init_seed)?;
            let train_config = TrainConfig {
                seed: derive_seed(config.seed, "train", 0),
                ..config.train.clone()
            };
            let (model, rep) = train(model, &train_set, val_set.as_ref(), &train_config)?;
            for e in &rep.epochs {
                log(format!(
                    "epoch {:3}: loss {:.4}, train accuracy {:.3}{}",
                    e.epoch,
                    e.loss,
                    e.train_accuracy,
                    e.validation_auc.map(|a| format!(", validation auc {a:.4}")).unwrap_or_default()
                ));
            }
            if let Some(d) = &rep.diverged {
                log(format!("training diverged: {d}"));
            }
            save_weights(&model, init_seed, &out)?;
            let report_path = report.unwrap_or_else(|| out.with_extension("report.json"));
            write_json(&report_path, &rep)?;
            log(format!("wrote {} and {}", out.display(), report_path.display()));
            if let Some(d) = rep.diverged {
                return Err(Error::Diverged { epoch: rep.epochs.len() + 1, detail: d });
            }
        }
        Command::Evaluate {
            dataset,
            kind,
            out,
            common,
        } => {
            dataset.apply(&mut config);
            common.apply(&mut config);
            config.validate()?;
            let manifest = config.manifest()?;
            let features: LabeledImages = extract_features(&manifest, kind, &config)?;
            let summary = evaluate_runs(&manifest, &features, &config, |o| {
                log(format!("run {:02}: auc {:.4}", o.run, o.auc));
                Ok(())
            })?;
            let text = serde_json::to_string_pretty(&summary)? + "\n";
            match out {
                Some(p) => write_text(&p, &text)?,
                None => print!("{text}"),
            }
            log(format!("mean auc over {} runs: {:.4}", summary.per_run_auc.len(), summary.mean_auc));
        }
        Command::Bench {
            kind,
            signal,
            repeats,
            steps,
            method,
            out,
            stft,
        } => {
            let mut bench = BenchConfig {
                stft: config.stft,
                cwt: config.cwt,
                repeats,
                ..BenchConfig::default()
            };
            stft.apply(&mut bench.stft);
            if let Some(m) = method {
                bench.cwt_method = m;
            }
            let x = match signal {
                Some(p) => load_wav(&p)?,
                None => default_bench_signal()?,
            };
            let kinds: Vec<FeatureKind> = match kind.as_str() {
                "both" => FeatureKind::BOTH.to_vec(),
                k => vec![parse_kind(k).map_err(Error::InvalidConfig)?],
            };
            let mut results = Vec::new();
            for k in kinds {
                let step_list = match (k, &steps) {
                    (FeatureKind::Scalogram, Some(s)) => s.clone(),
                    _ => vec![bench.cwt.translation_step],
                };
                for step in step_list {
                    let cfg = BenchConfig {
                        cwt: CwtConfig {
                            translation_step: step,
                            ..bench.cwt
                        },
                        ..bench.clone()
                    };
                    let r = time_transform(k, &x, &cfg)?;
                    log(format!("{}: median {:.4} s over {} repeats", r.label, r.median_s, r.repeats));
                    results.push(r);
                }
            }
            let report = bench_report(&results, MIMII_FILE_COUNT)?;
            create_dir(&out)?;
            write_text(&out.join("bench.json"), &report.to_json()?)?;
            let csv_path = out.join("bench.csv");
            report.write_csv(fs::File::create(&csv_path).map_err(|e| Error::io(&csv_path, e))?)?;
            for q in &report.ratios {
                log(format!("{} / {} = {:.2}", q.numerator, q.denominator, q.ratio));
            }
        }
        Command::DemoResolution { out } => {
            let demo_config = DemoConfig::default();
            let demo = run_resolution_demo(&demo_config)?;
            write_resolution_demo(&demo, &demo_config, &out)?;
            log(format!(
                "verdict: {} (written to {})",
                if demo.verdict.pass { "pass" } else { "fail" },
                out.join("verdict.json").display()
            ));
            if !demo.verdict.pass {
                return Err(Error::Metric("resolution demo verdict failed".into()));
            }
        }
        Command::Compare { dataset, out, common } => {
            dataset.apply(&mut config);
            common.apply(&mut config);
            let report = compare(&config, &out)?;
            for row in &report.rows {
                log(format!(
                    "{} on {}: mean auc {:.4}",
                    row.config, row.machine_or_family, row.mean_auc
                ));
            }
        }
    }
    Ok(())
}

fn raw_transform(x: &AudioSignal, kind: FeatureKind, config: &PipelineConfig) -> Result<TfMatrix> {
    match kind {
        FeatureKind::Spectrogram => crate::stft::spectrogram(x, &config.stft),
        FeatureKind::Scalogram => crate::cwt::scalogram_of(x, &config.cwt, config.cwt_method),
    }
}

/// Ten seconds of stationary machine sound at 16 kHz (160,000 samples).
pub fn default_bench_signal() -> Result<AudioSignal> {
    let spec = SynthSpec {
        kind: SynthKind::StationaryMachine {
            fundamental_hz: 150.0,
            harmonic_amplitudes: vec![1.0, 0.5, 0.25],
            extra_tones: vec![],
        },
        duration_s: 10.0,
        noise_snr_db: Some(0.0),
        seed: 1,
    };
    synthesize(&spec, crate::dataset::DEFAULT_SAMPLE_RATE_HZ)
}

/// Writes every synthetic example as `<label>/<index>.wav` under `out_dir`
/// plus a `manifest.jsonl` referring to those files by relative path.
pub fn materialize(synth: &DatasetManifest, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let mut examples = Vec::with_capacity(synth.len());
    let mut written = Vec::with_capacity(synth.len());
    for (i, e) in synth.examples.iter().enumerate() {
        let sub = match e.label {
            crate::dataset::Label::Normal => "normal",
            crate::dataset::Label::Abnormal => "abnormal",
        };
        let rel = PathBuf::from(sub).join(format!("{i:05}.wav"));
        let path = out_dir.join(&rel);
        create_dir(path.parent().expect("joined path has a parent"))?;
        write_wav(&e.load()?, &path)?;
        written.push(path);
        examples.push(LabeledExample {
            source: Source::File(rel),
            ..e.clone()
        });
    }
    DatasetManifest::new(examples, synth.split_seed, synth.val_fraction).write_jsonl(out_dir.join("manifest.jsonl"))?;
    Ok(written)
}

/// Parses `args` and runs the command, returning the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("tfscope: error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn flags_override_config() {
        let mut c = PipelineConfig::default();
        let args = CommonArgs {
            seed: Some(9),
            stft: StftArgs {
                n: Some(256),
                ..StftArgs::default()
            },
            train: TrainArgs {
                epochs: Some(3),
                ..TrainArgs::default()
            },
            ..CommonArgs::default()
        };
        args.apply(&mut c);
        assert_eq!((c.seed, c.stft.frame_size_n, c.stft.hop_size_h, c.train.epochs), (9, 256, 128, 3));
        DatasetArgs {
            snr_db: Some(-6.0),
            ..DatasetArgs::default()
        }
        .apply(&mut c);
        assert!(matches!(c.dataset, DatasetSource::Synthetic { snr_db: Some(s), .. } if s == -6.0));
    }

    #[test]
    fn enum_parsing() {
        assert_eq!(parse_enum::<CwtMethod>("direct").unwrap(), CwtMethod::Direct);
        assert!(parse_enum::<CwtMethod>("fast").is_err());
        assert_eq!(parse_kind("scalogram").unwrap(), FeatureKind::Scalogram);
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["tfscope", "bogus"]), 2);
        assert_eq!(run(["tfscope", "transform", "--kind", "wavelet", "x.wav"]), 2);
        assert_eq!(run(["tfscope", "--help"]), 0);
    }

    #[test]
    fn bench_signal_length() {
        assert_eq!(default_bench_signal().unwrap().len(), 160_000);
    }
}
