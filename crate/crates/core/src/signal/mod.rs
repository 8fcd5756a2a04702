//! Audio signals: WAV input/output, peak normalization and synthesis.

mod synth;
mod wav;

pub use synth::{
    clean_component, impulse_onsets, noise_component, synthesize, SynthKind, SynthSpec,
    ToneComponent,
};
pub use wav::{load_wav, write_wav};

use crate::error::{Error, Result};

/// A discrete, finite, mono waveform.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioSignal {
    samples: Vec<f64>,
    sample_rate_hz: u32,
}

impl AudioSignal {
    pub fn new(samples: Vec<f64>, sample_rate_hz: u32) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidSignal("signal has no samples".into()));
        }
        if sample_rate_hz == 0 {
            return Err(Error::InvalidSignal("sample rate must be positive".into()));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidSignal(format!(
                "sample {i} is not finite ({})",
                samples[i]
            )));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    /// Number of samples (M).
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate_hz)
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0_f64, |m, s| m.max(s.abs()))
    }

    /// Mean power, `mean(x²)`.
    pub fn power(&self) -> f64 {
        mean_power(&self.samples)
    }
}

pub(crate) fn mean_power(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
}

/// Divides every sample by `max |y|` so the output peak is exactly one.
///
/// A silent signal is rejected: the quotient is undefined there and
/// passing zeros through would produce blank heatmaps downstream.
pub fn peak_normalize(signal: &AudioSignal) -> Result<AudioSignal> {
    let peak = signal.peak();
    if peak == 0.0 {
        return Err(Error::SilentSignal);
    }
    let samples = signal.samples.iter().map(|s| s / peak).collect();
    Ok(AudioSignal {
        samples,
        sample_rate_hz: signal.sample_rate_hz,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sig(x: &[f64]) -> AudioSignal {
        AudioSignal::new(x.to_vec(), 16_000).unwrap()
    }

    #[test]
    fn rejects_invalid_signals() {
        assert!(AudioSignal::new(vec![], 16_000).is_err());
        assert!(AudioSignal::new(vec![0.1], 0).is_err());
        assert!(AudioSignal::new(vec![0.1, f64::NAN], 8_000).is_err());
        assert!(AudioSignal::new(vec![f64::INFINITY], 8_000).is_err());
    }

    #[test]
    fn normalize_examples() {
        let out = peak_normalize(&sig(&[0.5, -0.25, 0.1])).unwrap();
        assert_eq!(out.samples(), &[1.0, -0.5, 0.2]);
        let out = peak_normalize(&sig(&[1.0, -0.3])).unwrap();
        assert_eq!(out.samples(), &[1.0, -0.3]);
        let out = peak_normalize(&sig(&[2.0, -4.0])).unwrap();
        assert_eq!(out.samples(), &[0.5, -1.0]);
        assert_eq!(out.sample_rate_hz(), 16_000);
    }

    #[test]
    fn silent_signal_is_an_error() {
        assert!(matches!(
            peak_normalize(&sig(&[0.0, 0.0, -0.0])),
            Err(Error::SilentSignal)
        ));
    }

    proptest! {
        #[test]
        fn normalization_properties(xs in prop::collection::vec(-1e3f64..1e3, 1..200)) {
            prop_assume!(xs.iter().any(|x| *x != 0.0));
            let input = sig(&xs);
            let once = peak_normalize(&input).unwrap();
            let twice = peak_normalize(&once).unwrap();
            let peak = once.peak();
            prop_assert!(peak <= 1.0 && peak >= 1.0 - 1e-12);
            for ((a, b), x) in once.samples().iter().zip(twice.samples()).zip(&xs) {
                prop_assert!((a - b).abs() <= 1e-12);
                prop_assert_eq!(a.signum() == x.signum() || *x == 0.0, true);
                prop_assert_eq!(*a == 0.0, *x == 0.0);
            }
        }
    }
}
