use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{mean_power, AudioSignal};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToneComponent {
    pub frequency_hz: f64,
    pub amplitude: f64,
}

/// Kind-specific synthesis parameters. Serialized with an internal
/// `"kind"` tag, e.g. `{"kind": "tone", "frequency_hz": 1000.0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SynthKind {
    /// `amplitude · sin(2π f t)`.
    Tone {
        frequency_hz: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// Two unit sinusoids plus single-sample unit impulses.
    MultiTonePlusImpulses {
        frequencies_hz: [f64; 2],
        impulse_times_s: Vec<f64>,
    },
    /// Harmonic stack: harmonic `k` (1-based) sits at `k · fundamental_hz`
    /// with amplitude `harmonic_amplitudes[k - 1]`; `extra_tones` are added
    /// on top.
    StationaryMachine {
        fundamental_hz: f64,
        harmonic_amplitudes: Vec<f64>,
        #[serde(default)]
        extra_tones: Vec<ToneComponent>,
    },
    /// Exponentially decaying rings. Successive onsets are separated by
    /// `period_s` plus a uniform draw in `[-jitter_s, jitter_s]`. When
    /// `double_every` is `n > 0`, every n-th ring (1-based) is followed by
    /// a second ring `double_gap_s` later.
    ImpulsiveMachine {
        period_s: f64,
        jitter_s: f64,
        ring_frequency_hz: f64,
        decay_s: f64,
        #[serde(default)]
        first_onset_s: f64,
        #[serde(default)]
        double_every: u32,
        #[serde(default)]
        double_gap_s: f64,
    },
}

fn one() -> f64 {
    1.0
}

/// A reproducible synthetic signal description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    #[serde(flatten)]
    pub kind: SynthKind,
    pub duration_s: f64,
    #[serde(default)]
    pub noise_snr_db: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

impl SynthSpec {
    pub fn validate(&self, sample_rate_hz: u32) -> Result<()> {
        if sample_rate_hz == 0 {
            return Err(Error::InvalidConfig("sample rate must be positive".into()));
        }
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "duration must be positive, got {}",
                self.duration_s
            )));
        }
        if let Some(snr) = self.noise_snr_db {
            if !snr.is_finite() {
                return Err(Error::InvalidConfig("noise SNR must be finite".into()));
            }
        }
        let nyquist = f64::from(sample_rate_hz) / 2.0;
        let check_freq = |f: f64| {
            if !(f.is_finite() && f > 0.0 && f < nyquist) {
                Err(Error::InvalidConfig(format!(
                    "frequency {f} Hz outside (0, {nyquist}) Hz"
                )))
            } else {
                Ok(())
            }
        };
        match &self.kind {
            SynthKind::Tone { frequency_hz, .. } => check_freq(*frequency_hz)?,
            SynthKind::MultiTonePlusImpulses {
                frequencies_hz,
                impulse_times_s,
            } => {
                for f in frequencies_hz {
                    check_freq(*f)?;
                }
                for &t in impulse_times_s {
                    if !(t >= 0.0 && t < self.duration_s) {
                        return Err(Error::InvalidConfig(format!(
                            "impulse time {t} s outside [0, {})",
                            self.duration_s
                        )));
                    }
                }
            }
            SynthKind::StationaryMachine {
                fundamental_hz,
                harmonic_amplitudes,
                extra_tones,
            } => {
                for k in 1..=harmonic_amplitudes.len() {
                    check_freq(fundamental_hz * k as f64)?;
                }
                for t in extra_tones {
                    check_freq(t.frequency_hz)?;
                }
            }
            SynthKind::ImpulsiveMachine {
                period_s,
                jitter_s,
                ring_frequency_hz,
                decay_s,
                first_onset_s,
                double_gap_s,
                ..
            } => {
                check_freq(*ring_frequency_hz)?;
                if !(*period_s > 0.0 && *decay_s > 0.0) {
                    return Err(Error::InvalidConfig(
                        "impulse period and decay must be positive".into(),
                    ));
                }
                if !(*jitter_s >= 0.0 && jitter_s < period_s) {
                    return Err(Error::InvalidConfig(
                        "jitter must lie in [0, period)".into(),
                    ));
                }
                if !(*first_onset_s >= 0.0 && *first_onset_s < self.duration_s) {
                    return Err(Error::InvalidConfig(format!(
                        "first onset {first_onset_s} s outside [0, {})",
                        self.duration_s
                    )));
                }
                if *double_gap_s < 0.0 {
                    return Err(Error::InvalidConfig("double gap must be >= 0".into()));
                }
            }
        }
        Ok(())
    }

    pub fn num_samples(&self, sample_rate_hz: u32) -> usize {
        ((self.duration_s * f64::from(sample_rate_hz)).round() as usize).max(1)
    }
}

/// Generates the noise-free component of `spec`.
///
/// Exposed so callers can measure signal power independently of the
/// noise mix.
pub fn clean_component(spec: &SynthSpec, sample_rate_hz: u32) -> Result<Vec<f64>> {
    spec.validate(sample_rate_hz)?;
    let fs = f64::from(sample_rate_hz);
    let len = spec.num_samples(sample_rate_hz);
    let t = |n: usize| n as f64 / fs;
    let mut x = vec![0.0; len];
    let add_tone = |x: &mut [f64], f: f64, a: f64| {
        for (n, v) in x.iter_mut().enumerate() {
            *v += a * (2.0 * PI * f * t(n)).sin();
        }
    };
    match &spec.kind {
        SynthKind::Tone {
            frequency_hz,
            amplitude,
        } => add_tone(&mut x, *frequency_hz, *amplitude),
        SynthKind::MultiTonePlusImpulses {
            frequencies_hz,
            impulse_times_s,
        } => {
            for &f in frequencies_hz {
                add_tone(&mut x, f, 1.0);
            }
            for &ti in impulse_times_s {
                let idx = ((ti * fs).round() as usize).min(len - 1);
                x[idx] += 1.0;
            }
        }
        SynthKind::StationaryMachine {
            fundamental_hz,
            harmonic_amplitudes,
            extra_tones,
        } => {
            for (k, &a) in harmonic_amplitudes.iter().enumerate() {
                add_tone(&mut x, fundamental_hz * (k + 1) as f64, a);
            }
            for tone in extra_tones {
                add_tone(&mut x, tone.frequency_hz, tone.amplitude);
            }
        }
        SynthKind::ImpulsiveMachine {
            ring_frequency_hz,
            decay_s,
            double_every,
            double_gap_s,
            ..
        } => {
            let ring_len = ((decay_s * 12.0 * fs).ceil() as usize).max(1);
            let gap = (double_gap_s * fs).round() as usize;
            for (i, onset) in impulse_onsets(spec, sample_rate_hz).into_iter().enumerate() {
                add_ring(&mut x, onset, ring_len, *ring_frequency_hz, *decay_s, fs);
                if *double_every > 0 && (i + 1) % *double_every as usize == 0 {
                    add_ring(&mut x, onset + gap, ring_len, *ring_frequency_hz, *decay_s, fs);
                }
            }
        }
    }
    Ok(x)
}

fn add_ring(x: &mut [f64], onset: usize, ring_len: usize, freq: f64, decay: f64, fs: f64) {
    let end = (onset + ring_len).min(x.len());
    for n in onset..end {
        let tau = (n - onset) as f64 / fs;
        x[n] += (-tau / decay).exp() * (2.0 * PI * freq * tau).cos();
    }
}

/// Onset sample indices of the primary rings of an impulsive machine.
///
/// Each gap is drawn in whole samples from
/// `[ceil((period - jitter)·fs), floor((period + jitter)·fs)]`, so the
/// realized intervals never leave `period ± jitter`.
pub fn impulse_onsets(spec: &SynthSpec, sample_rate_hz: u32) -> Vec<usize> {
    let SynthKind::ImpulsiveMachine {
        period_s,
        jitter_s,
        first_onset_s,
        ..
    } = &spec.kind
    else {
        return Vec::new();
    };
    let fs = f64::from(sample_rate_hz);
    let len = spec.num_samples(sample_rate_hz);
    let lo = ((period_s - jitter_s) * fs - 1e-9).ceil().max(1.0) as usize;
    let hi = (((period_s + jitter_s) * fs + 1e-9).floor() as usize).max(lo);
    let mut rng = rng_from_seed(derive_seed(spec.seed, "jitter", 0));
    let mut onsets = Vec::new();
    let mut n = (first_onset_s * fs).round() as usize;
    while n < len {
        onsets.push(n);
        n += rng.random_range(lo..=hi);
    }
    onsets
}

/// Renders `spec` at `sample_rate_hz`. Deterministic in `(spec, seed)`.
///
/// With `noise_snr_db = Some(s)`, white Gaussian noise (ChaCha8 stream
/// "noise") is scaled so its measured power is exactly
/// `P_signal / 10^(s/10)`.
pub fn synthesize(spec: &SynthSpec, sample_rate_hz: u32) -> Result<AudioSignal> {
    let mut x = clean_component(spec, sample_rate_hz)?;
    if let Some(snr_db) = spec.noise_snr_db {
        let noise = noise_component(spec, x.len());
        let p_signal = mean_power(&x);
        let p_noise = mean_power(&noise);
        if p_signal > 0.0 && p_noise > 0.0 {
            let gain = (p_signal / 10f64.powf(snr_db / 10.0) / p_noise).sqrt();
            for (v, n) in x.iter_mut().zip(&noise) {
                *v += gain * n;
            }
        }
    }
    AudioSignal::new(x, sample_rate_hz)
}

/// Unscaled unit-variance noise used by [`synthesize`].
pub fn noise_component(spec: &SynthSpec, len: usize) -> Vec<f64> {
    let mut rng = rng_from_seed(derive_seed(spec.seed, "noise", 0));
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const FS: u32 = 16_000;

    fn tone(f: f64) -> SynthSpec {
        SynthSpec {
            kind: SynthKind::Tone {
                frequency_hz: f,
                amplitude: 1.0,
            },
            duration_s: 1.0,
            noise_snr_db: None,
            seed: 0,
        }
    }

    fn machine(snr: Option<f64>, seed: u64) -> SynthSpec {
        SynthSpec {
            kind: SynthKind::StationaryMachine {
                fundamental_hz: 150.0,
                harmonic_amplitudes: vec![1.0, 0.5, 0.25],
                extra_tones: vec![],
            },
            duration_s: 1.0,
            noise_snr_db: snr,
            seed,
        }
    }

    #[test]
    fn tone_starts_at_zero() {
        let s = synthesize(&tone(1000.0), FS).unwrap();
        assert_eq!(s.len(), 16_000);
        assert_eq!(s.samples()[0], 0.0);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(synthesize(&tone(8000.0), FS).is_err());
        assert!(synthesize(&tone(9000.0), FS).is_err());
        let mut s = tone(100.0);
        s.duration_s = 0.0;
        assert!(synthesize(&s, FS).is_err());
        s.duration_s = -1.0;
        assert!(synthesize(&s, FS).is_err());
        let bad_impulse = SynthSpec {
            kind: SynthKind::MultiTonePlusImpulses {
                frequencies_hz: [500.0, 600.0],
                impulse_times_s: vec![1.0],
            },
            ..tone(1.0)
        };
        assert!(synthesize(&bad_impulse, FS).is_err());
    }

    #[test]
    fn exactly_two_impulse_samples() {
        let spec = SynthSpec {
            kind: SynthKind::MultiTonePlusImpulses {
                frequencies_hz: [500.0, 600.0],
                impulse_times_s: vec![0.48, 0.52],
            },
            ..tone(1.0)
        };
        let with = synthesize(&spec, FS).unwrap();
        let fs = f64::from(FS);
        let diffs: Vec<usize> = with
            .samples()
            .iter()
            .enumerate()
            .filter_map(|(n, v)| {
                let t = n as f64 / fs;
                let tones = (2.0 * PI * 500.0 * t).sin() + (2.0 * PI * 600.0 * t).sin();
                ((v - tones).abs() > 1e-9).then_some(n)
            })
            .collect();
        assert_eq!(diffs, vec![7680, 8320]);
        for n in diffs {
            let t = n as f64 / fs;
            let tones = (2.0 * PI * 500.0 * t).sin() + (2.0 * PI * 600.0 * t).sin();
            assert!((with.samples()[n] - tones - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn snr_is_realized() {
        for snr in [-6.0, 0.0, 6.0] {
            let spec = machine(Some(snr), 11);
            let clean = clean_component(&spec, FS).unwrap();
            let mixed = synthesize(&spec, FS).unwrap();
            let noise: Vec<f64> = mixed.samples().iter().zip(&clean).map(|(m, c)| m - c).collect();
            let measured = 10.0 * (mean_power(&clean) / mean_power(&noise)).log10();
            assert!((measured - snr).abs() < 0.1, "snr {snr}: measured {measured}");
        }
    }

    #[test]
    fn bit_reproducible() {
        let a = synthesize(&machine(Some(0.0), 3), FS).unwrap();
        let b = synthesize(&machine(Some(0.0), 3), FS).unwrap();
        assert_eq!(a, b);
        let c = synthesize(&machine(Some(0.0), 4), FS).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn onsets_respect_jitter_bounds() {
        let spec = SynthSpec {
            kind: SynthKind::ImpulsiveMachine {
                period_s: 0.1,
                jitter_s: 0.002,
                ring_frequency_hz: 1500.0,
                decay_s: 0.003,
                first_onset_s: 0.01,
                double_every: 0,
                double_gap_s: 0.0,
            },
            duration_s: 2.0,
            noise_snr_db: None,
            seed: 5,
        };
        let onsets = impulse_onsets(&spec, FS);
        assert!(onsets.len() >= 19);
        for w in onsets.windows(2) {
            let gap = (w[1] - w[0]) as f64 / f64::from(FS);
            assert!((0.098..=0.102).contains(&gap), "gap {gap}");
        }
    }

    #[test]
    fn spec_json_shape() {
        let json = r#"{"kind":"tone","frequency_hz":1000.0,"duration_s":0.5,"seed":9}"#;
        let spec: SynthSpec = serde_json::from_str(json).unwrap();
        assert_eq!(spec.noise_snr_db, None);
        assert_eq!(spec.seed, 9);
        let back: SynthSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
    }
}
