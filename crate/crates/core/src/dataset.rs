//! Labeled example manifests: MIMII directory scanning, synthetic
//! stand-in datasets, and stratified train/validation splits.
//!
//! Manifests persist as JSON lines, one [`LabeledExample`] per line.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};
use crate::signal::{load_wav, synthesize, AudioSignal, SynthKind, SynthSpec, ToneComponent};

pub const DEFAULT_SAMPLE_RATE_HZ: u32 = 16_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Normal,
    Abnormal,
}

impl Label {
    /// Class index used by the classifier (abnormal = 1).
    pub fn class(self) -> usize {
        match self {
            Label::Normal => 0,
            Label::Abnormal => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MachineType {
    Fan,
    Pump,
    Slider,
    Valve,
    SynthStationary,
    SynthImpulsive,
}

impl MachineType {
    pub fn name(self) -> &'static str {
        match self {
            MachineType::Fan => "fan",
            MachineType::Pump => "pump",
            MachineType::Slider => "slider",
            MachineType::Valve => "valve",
            MachineType::SynthStationary => "synth_stationary",
            MachineType::SynthImpulsive => "synth_impulsive",
        }
    }
}

impl std::str::FromStr for MachineType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_owned()))
            .map_err(|_| Error::InvalidConfig(format!("unknown machine type {s:?}")))
    }
}

/// Where an example's audio comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    File(PathBuf),
    Synth { spec: SynthSpec, sample_rate_hz: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub source: Source,
    pub label: Label,
    pub machine_type: MachineType,
    pub snr_db: Option<f64>,
}

impl LabeledExample {
    pub fn load(&self) -> Result<AudioSignal> {
        match &self.source {
            Source::File(path) => load_wav(path),
            Source::Synth {
                spec,
                sample_rate_hz,
            } => synthesize(spec, *sample_rate_hz),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub examples: Vec<LabeledExample>,
    pub split_seed: u64,
    pub val_fraction: f64,
}

impl DatasetManifest {
    pub fn new(examples: Vec<LabeledExample>, split_seed: u64, val_fraction: f64) -> Self {
        Self {
            examples,
            split_seed,
            val_fraction,
        }
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn count(&self, label: Label) -> usize {
        self.examples.iter().filter(|e| e.label == label).count()
    }

    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for e in &self.examples {
            out.push_str(&serde_json::to_string(e)?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn write_jsonl(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(self.to_jsonl()?.as_bytes())
            .map_err(|e| Error::io(path, e))
    }

    /// Reads a JSON-lines manifest; blank lines are skipped. Relative file
    /// sources are resolved against the manifest's directory.
    pub fn read_jsonl(path: impl AsRef<Path>, split_seed: u64, val_fraction: f64) -> Result<Self> {
        let path = path.as_ref();
        let base = path.parent().unwrap_or(Path::new(""));
        let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut examples = Vec::new();
        for line in BufReader::new(f).lines() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let mut example: LabeledExample = serde_json::from_str(&line)?;
            if let Source::File(p) = &mut example.source {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
            examples.push(example);
        }
        Ok(Self::new(examples, split_seed, val_fraction))
    }
}

/// Relative-path glob patterns identifying normal and abnormal recordings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPatterns {
    pub normal: String,
    pub abnormal: String,
}

impl Default for ScanPatterns {
    fn default() -> Self {
        Self {
            normal: "**/normal/*.wav".into(),
            abnormal: "**/abnormal/*.wav".into(),
        }
    }
}

/// Collects WAV files under `root` whose root-relative path matches one of
/// the label patterns, in lexicographic path order.
pub fn scan_mimii(
    root: impl AsRef<Path>,
    machine_type: MachineType,
    snr_db: Option<f64>,
    patterns: &ScanPatterns,
) -> Result<DatasetManifest> {
    let root = root.as_ref();
    if !root.is_dir() {
        return Err(Error::Dataset(format!("missing directory {}", root.display())));
    }
    let compile = |p: &str| {
        glob::Pattern::new(p).map_err(|e| Error::InvalidConfig(format!("bad pattern {p:?}: {e}")))
    };
    let (normal, abnormal) = (compile(&patterns.normal)?, compile(&patterns.abnormal)?);
    let opts = glob::MatchOptions {
        case_sensitive: false,
        require_literal_separator: true,
        require_literal_leading_dot: false,
    };
    let mut found: Vec<(PathBuf, Label)> = Vec::new();
    for entry in walkdir::WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(|e| Error::Dataset(e.to_string()))?;
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = entry.path().strip_prefix(root).unwrap_or(entry.path());
        let label = if abnormal.matches_path_with(rel, opts) {
            Label::Abnormal
        } else if normal.matches_path_with(rel, opts) {
            Label::Normal
        } else {
            continue;
        };
        found.push((entry.path().to_path_buf(), label));
    }
    if found.is_empty() {
        return Err(Error::Dataset(format!("no files found under {}", root.display())));
    }
    found.sort();
    let examples = found
        .into_iter()
        .map(|(path, label)| LabeledExample {
            source: Source::File(path),
            label,
            machine_type,
            snr_db,
        })
        .collect();
    Ok(DatasetManifest::new(examples, 0, 0.2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Stationary,
    Impulsive,
}

impl Family {
    pub fn machine_type(self) -> MachineType {
        match self {
            Family::Stationary => MachineType::SynthStationary,
            Family::Impulsive => MachineType::SynthImpulsive,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Stationary => "stationary",
            Family::Impulsive => "impulsive",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stationary" => Ok(Family::Stationary),
            "impulsive" => Ok(Family::Impulsive),
            _ => Err(Error::InvalidConfig(format!("unknown family {s:?}"))),
        }
    }
}

/// Class-defining parameters of the synthetic families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthFamilyConfig {
    pub duration_s: f64,
    pub sample_rate_hz: u32,
    pub f0_min_hz: f64,
    pub f0_max_hz: f64,
    pub harmonic_amplitudes: Vec<f64>,
    /// Abnormal stationary examples add a tone at `ratio · f0`.
    pub anomaly_tone_ratio: f64,
    pub anomaly_tone_amplitude: f64,
    pub impulse_period_s: f64,
    pub impulse_jitter_s: f64,
    /// Ring carrier as a multiple of f0.
    pub ring_frequency_ratio: f64,
    pub ring_decay_s: f64,
    /// Abnormal impulsive examples double every n-th ring.
    pub double_every: u32,
    pub double_gap_s: f64,
}

impl Default for SynthFamilyConfig {
    fn default() -> Self {
        Self {
            duration_s: 1.0,
            sample_rate_hz: DEFAULT_SAMPLE_RATE_HZ,
            f0_min_hz: 140.0,
            f0_max_hz: 160.0,
            harmonic_amplitudes: vec![1.0, 0.5, 0.25],
            anomaly_tone_ratio: 2.37,
            anomaly_tone_amplitude: 0.4,
            impulse_period_s: 0.1,
            impulse_jitter_s: 0.002,
            ring_frequency_ratio: 10.0,
            ring_decay_s: 0.004,
            double_every: 2,
            double_gap_s: 0.01,
        }
    }
}

impl SynthFamilyConfig {
    /// Signal description of one example. `draw_seed` fixes f0 and the first
    /// ring onset; `signal_seed` fixes jitter and noise.
    pub fn example_spec(&self, family: Family, label: Label, snr_db: Option<f64>, draw_seed: u64, signal_seed: u64) -> SynthSpec {
        let mut rng = rng_from_seed(draw_seed);
        let f0 = rng.random_range(self.f0_min_hz..=self.f0_max_hz);
        let kind = match family {
            Family::Stationary => SynthKind::StationaryMachine {
                fundamental_hz: f0,
                harmonic_amplitudes: self.harmonic_amplitudes.clone(),
                extra_tones: match label {
                    Label::Normal => vec![],
                    Label::Abnormal => vec![ToneComponent {
                        frequency_hz: self.anomaly_tone_ratio * f0,
                        amplitude: self.anomaly_tone_amplitude,
                    }],
                },
            },
            Family::Impulsive => SynthKind::ImpulsiveMachine {
                period_s: self.impulse_period_s,
                jitter_s: self.impulse_jitter_s,
                ring_frequency_hz: self.ring_frequency_ratio * f0,
                decay_s: self.ring_decay_s,
                first_onset_s: rng.random_range(0.0..self.impulse_period_s),
                double_every: match label {
                    Label::Normal => 0,
                    Label::Abnormal => self.double_every,
                },
                double_gap_s: self.double_gap_s,
            },
        };
        SynthSpec {
            kind,
            duration_s: self.duration_s,
            noise_snr_db: snr_db,
            seed: signal_seed,
        }
    }
}

/// Balanced synthetic dataset: `n_per_class` normal examples followed by
/// `n_per_class` abnormal ones.
pub fn generate_synthetic_dataset(
    n_per_class: usize,
    family: Family,
    snr_db: Option<f64>,
    seed: u64,
    config: &SynthFamilyConfig,
) -> Result<DatasetManifest> {
    if n_per_class < 2 {
        return Err(Error::Dataset(format!(
            "need at least 2 examples per class, got {n_per_class}"
        )));
    }
    let mut examples = Vec::with_capacity(2 * n_per_class);
    for label in [Label::Normal, Label::Abnormal] {
        for i in 0..n_per_class {
            let index = (label.class() * n_per_class + i) as u64;
            let spec = config.example_spec(
                family,
                label,
                snr_db,
                derive_seed(seed, "example", index),
                derive_seed(seed, "signal", index),
            );
            spec.validate(config.sample_rate_hz)?;
            examples.push(LabeledExample {
                source: Source::Synth {
                    spec,
                    sample_rate_hz: config.sample_rate_hz,
                },
                label,
                machine_type: family.machine_type(),
                snr_db,
            });
        }
    }
    Ok(DatasetManifest::new(examples, seed, 0.2))
}

/// Stratified split. Each label contributes `round(n · val_fraction)`
/// examples (at least one, leaving at least one for training) chosen by a
/// shuffle seeded from `split_seed`; both halves keep manifest order.
pub fn split(manifest: &DatasetManifest) -> Result<(DatasetManifest, DatasetManifest)> {
    let (train, val) = split_indices(manifest)?;
    let pick = |idx: &[usize]| {
        DatasetManifest::new(
            idx.iter().map(|&i| manifest.examples[i].clone()).collect(),
            manifest.split_seed,
            manifest.val_fraction,
        )
    };
    Ok((pick(&train), pick(&val)))
}

/// Manifest positions of the training and validation halves of [`split`],
/// each in ascending order.
pub fn split_indices(manifest: &DatasetManifest) -> Result<(Vec<usize>, Vec<usize>)> {
    let frac = manifest.val_fraction;
    if !(frac > 0.0 && frac < 1.0) {
        return Err(Error::Dataset(format!("validation fraction {frac} outside (0, 1)")));
    }
    if manifest.is_empty() {
        return Err(Error::Dataset("empty manifest".into()));
    }
    let mut is_val = vec![false; manifest.len()];
    for (stream, label) in [Label::Normal, Label::Abnormal].into_iter().enumerate() {
        let mut idx: Vec<usize> = (0..manifest.len())
            .filter(|&i| manifest.examples[i].label == label)
            .collect();
        if idx.len() < 2 {
            return Err(Error::Dataset(format!(
                "label {label:?} has {} examples; at least 2 are needed to split",
                idx.len()
            )));
        }
        let n_val = ((idx.len() as f64 * frac).round() as usize).clamp(1, idx.len() - 1);
        idx.shuffle(&mut rng_from_seed(derive_seed(manifest.split_seed, "split", stream as u64)));
        for &i in &idx[..n_val] {
            is_val[i] = true;
        }
    }
    let (val, train): (Vec<usize>, Vec<usize>) = (0..manifest.len()).partition(|&i| is_val[i]);
    Ok((train, val))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{clean_component, write_wav};

    fn file_manifest(normal: usize, abnormal: usize, seed: u64, frac: f64) -> DatasetManifest {
        let examples = (0..normal + abnormal)
            .map(|i| LabeledExample {
                source: Source::File(PathBuf::from(format!("{i:03}.wav"))),
                label: if i < normal { Label::Normal } else { Label::Abnormal },
                machine_type: MachineType::Fan,
                snr_db: Some(0.0),
            })
            .collect();
        DatasetManifest::new(examples, seed, frac)
    }

    #[test]
    fn scan_labels_from_path() {
        let dir = tempfile::tempdir().unwrap();
        let tone = AudioSignal::new(vec![0.1, -0.1], 16_000).unwrap();
        for (sub, n) in [("id_00/normal", 3), ("id_00/abnormal", 2)] {
            let d = dir.path().join(sub);
            fs::create_dir_all(&d).unwrap();
            for i in 0..n {
                write_wav(&tone, d.join(format!("{i:08}.wav"))).unwrap();
            }
        }
        fs::write(dir.path().join("id_00/normal/readme.txt"), "x").unwrap();
        let m = scan_mimii(dir.path(), MachineType::Valve, Some(6.0), &ScanPatterns::default()).unwrap();
        assert_eq!(m.len(), 5);
        assert_eq!(m.count(Label::Normal), 3);
        assert_eq!(m.count(Label::Abnormal), 2);
        let paths: Vec<_> = m.examples.iter().map(|e| e.source.clone()).collect();
        let mut sorted = paths.clone();
        sorted.sort_by_key(|s| format!("{s:?}"));
        assert_eq!(paths, sorted);
        assert!(m.examples.iter().all(|e| e.machine_type == MachineType::Valve));
        assert_eq!(m.examples[0].load().unwrap().len(), 2);
    }

    #[test]
    fn scan_errors() {
        let dir = tempfile::tempdir().unwrap();
        let err = scan_mimii(dir.path(), MachineType::Fan, None, &ScanPatterns::default()).unwrap_err();
        assert!(err.to_string().contains("no files found"));
        assert!(scan_mimii(dir.path().join("nope"), MachineType::Fan, None, &ScanPatterns::default()).is_err());
    }

    #[test]
    fn split_counts() {
        let m = file_manifest(10, 10, 3, 0.2);
        let (train, val) = split(&m).unwrap();
        assert_eq!((train.len(), val.len()), (16, 4));
        assert_eq!(val.count(Label::Abnormal), 2);
        assert_eq!(split(&m).unwrap(), (train.clone(), val.clone()));

        let other = DatasetManifest { split_seed: 4, ..m.clone() };
        let (train2, val2) = split(&other).unwrap();
        assert_eq!(val2.count(Label::Abnormal), 2);
        assert_eq!(train2.len(), 16);
        assert_ne!(val2.examples, val.examples);
    }

    #[test]
    fn split_is_a_partition() {
        for (n, a, frac, seed) in [(7, 5, 0.3, 1), (2, 2, 0.5, 2), (30, 3, 0.1, 9), (11, 13, 0.9, 4)] {
            let m = file_manifest(n, a, seed, frac);
            let (train, val) = split(&m).unwrap();
            assert_eq!(train.len() + val.len(), m.len());
            for e in &m.examples {
                let in_train = train.examples.contains(e);
                let in_val = val.examples.contains(e);
                assert!(in_train ^ in_val);
            }
            for label in [Label::Normal, Label::Abnormal] {
                let total = m.count(label) as f64;
                assert!((val.count(label) as f64 - total * frac).abs() <= 1.0);
                assert!(train.count(label) >= 1 && val.count(label) >= 1);
            }
        }
    }

    #[test]
    fn split_errors() {
        assert!(split(&file_manifest(1, 5, 0, 0.2)).is_err());
        assert!(split(&file_manifest(5, 5, 0, 0.0)).is_err());
        assert!(split(&file_manifest(5, 5, 0, 1.0)).is_err());
    }

    #[test]
    fn synthetic_is_deterministic() {
        let cfg = SynthFamilyConfig::default();
        let a = generate_synthetic_dataset(8, Family::Stationary, Some(0.0), 7, &cfg).unwrap();
        let b = generate_synthetic_dataset(8, Family::Stationary, Some(0.0), 7, &cfg).unwrap();
        assert_eq!(a.len(), 16);
        assert_eq!(a, b);
        assert_eq!(a.examples[3].load().unwrap(), b.examples[3].load().unwrap());
        assert!(generate_synthetic_dataset(1, Family::Impulsive, None, 7, &cfg).is_err());
    }

    #[test]
    fn impulsive_intervals() {
        let cfg = SynthFamilyConfig::default();
        let m = generate_synthetic_dataset(3, Family::Impulsive, None, 21, &cfg).unwrap();
        for ex in m.examples.iter().filter(|e| e.label == Label::Normal) {
            let Source::Synth { spec, sample_rate_hz } = &ex.source else { unreachable!() };
            let x = clean_component(spec, *sample_rate_hz).unwrap();
            // onsets: samples at amplitude ~1 after a quiet stretch
            let fs = f64::from(*sample_rate_hz);
            let mut peaks = Vec::new();
            let mut last: Option<usize> = None;
            for (n, v) in x.iter().enumerate() {
                if v.abs() > 0.9 && last.is_none_or(|l| n - l > 800) {
                    peaks.push(n);
                    last = Some(n);
                }
            }
            assert!(peaks.len() >= 9);
            for w in peaks.windows(2) {
                let gap_ms = (w[1] - w[0]) as f64 / fs * 1000.0;
                assert!((98.0..=102.0).contains(&gap_ms), "gap {gap_ms} ms");
            }
        }
    }

    #[test]
    fn jsonl_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.jsonl");
        let m = generate_synthetic_dataset(2, Family::Impulsive, Some(-6.0), 1, &SynthFamilyConfig::default()).unwrap();
        m.write_jsonl(&p).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().count(), 4);
        let back = DatasetManifest::read_jsonl(&p, m.split_seed, m.val_fraction).unwrap();
        assert_eq!(back, m);
    }
}
