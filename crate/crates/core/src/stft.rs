//! Short-time Fourier transform and power spectrogram.
//!
//! Frames are centered: the signal is zero-padded by `N/2` on both sides
//! and frame `m` covers padded samples `m·H .. m·H + N`, giving
//! `floor(M/H) + 1` frames. Each frame is windowed and transformed with a
//! length-`N` DFT using frame-local time, `X(m,k) = Σ_r x[mH + r - N/2]·w[r]·e^{-j2πkr/N}`.
//! Only bins `0..=N/2` are kept.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::AudioSignal;
use crate::tf::{ComplexMatrix, RowAxis, TfKind, TfMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    /// Periodic Hann, `0.5·(1 − cos(2πi/n))`.
    Hann,
    Rectangular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StftConfig {
    pub frame_size_n: usize,
    pub hop_size_h: usize,
    pub window: WindowKind,
    pub center_pad: bool,
}

impl Default for StftConfig {
    fn default() -> Self {
        Self::with_frame(1024)
    }
}

impl StftConfig {
    /// Hann window, centered frames, hop `N/2`.
    pub fn with_frame(frame_size_n: usize) -> Self {
        Self {
            frame_size_n,
            hop_size_h: (frame_size_n / 2).max(1),
            window: WindowKind::Hann,
            center_pad: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.frame_size_n == 0 {
            return Err(Error::InvalidConfig("STFT frame size must be positive".into()));
        }
        if self.hop_size_h == 0 || self.hop_size_h > self.frame_size_n {
            return Err(Error::InvalidConfig(format!(
                "STFT hop {} must be in 1..={}",
                self.hop_size_h, self.frame_size_n
            )));
        }
        Ok(())
    }

    pub fn num_bins(&self) -> usize {
        self.frame_size_n / 2 + 1
    }

    pub fn num_frames(&self, signal_len: usize) -> usize {
        if self.center_pad {
            signal_len / self.hop_size_h + 1
        } else if signal_len >= self.frame_size_n {
            (signal_len - self.frame_size_n) / self.hop_size_h + 1
        } else {
            1
        }
    }

    fn frame_offset(&self) -> isize {
        if self.center_pad {
            (self.frame_size_n / 2) as isize
        } else {
            0
        }
    }
}

pub fn make_window(kind: WindowKind, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidConfig("window length must be positive".into()));
    }
    Ok(match kind {
        WindowKind::Rectangular => vec![1.0; n],
        WindowKind::Hann => (0..n)
            .map(|i| 0.5 * (1.0 - (2.0 * PI * i as f64 / n as f64).cos()))
            .collect(),
    })
}

/// Windowed frame `m`, zero outside the signal.
pub(crate) fn windowed_frame(x: &[f64], config: &StftConfig, window: &[f64], m: usize) -> Vec<f64> {
    let start = (m * config.hop_size_h) as isize - config.frame_offset();
    window
        .iter()
        .enumerate()
        .map(|(r, w)| {
            let idx = start + r as isize;
            if idx >= 0 && (idx as usize) < x.len() {
                x[idx as usize] * w
            } else {
                0.0
            }
        })
        .collect()
}

/// Full two-sided spectrum of every frame, `frames × N`.
pub(crate) fn full_spectra(signal: &AudioSignal, config: &StftConfig) -> Result<Vec<Vec<Complex64>>> {
    config.validate()?;
    let n = config.frame_size_n;
    let window = make_window(config.window, n)?;
    let fft = FftPlanner::new().plan_fft_forward(n);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let x = signal.samples();
    Ok((0..config.num_frames(x.len()))
        .map(|m| {
            let mut buf: Vec<Complex64> = windowed_frame(x, config, &window, m)
                .into_iter()
                .map(|v| Complex64::new(v, 0.0))
                .collect();
            fft.process_with_scratch(&mut buf, &mut scratch);
            buf
        })
        .collect())
}

/// One-sided STFT coefficients, `(N/2 + 1)` rows × frames.
pub fn stft(signal: &AudioSignal, config: &StftConfig) -> Result<ComplexMatrix> {
    let spectra = full_spectra(signal, config)?;
    let bins = config.num_bins();
    let cols = spectra.len();
    let mut out = ComplexMatrix::zeros(bins, cols);
    for (m, spectrum) in spectra.iter().enumerate() {
        for k in 0..bins {
            out.row_mut(k)[m] = spectrum[k];
        }
    }
    Ok(out)
}

/// `|X(m,k)|²` with rows labeled `k·fs/N` Hz and columns `H/fs` apart.
pub fn power_spectrogram(
    coeffs: &ComplexMatrix,
    config: &StftConfig,
    sample_rate_hz: u32,
) -> Result<TfMatrix> {
    config.validate()?;
    if coeffs.rows() != config.num_bins() {
        return Err(Error::Shape(format!(
            "{} coefficient rows, expected N/2+1 = {}",
            coeffs.rows(),
            config.num_bins()
        )));
    }
    if sample_rate_hz == 0 {
        return Err(Error::InvalidConfig("sample rate must be positive".into()));
    }
    let fs = f64::from(sample_rate_hz);
    let n = config.frame_size_n as f64;
    let coords = (0..coeffs.rows()).map(|k| k as f64 * fs / n).collect();
    TfMatrix::new(
        coeffs.rows(),
        coeffs.cols(),
        coeffs.power(),
        RowAxis::FrequencyHz,
        coords,
        config.hop_size_h as f64 / fs,
        TfKind::Spectrogram,
    )
}

/// Signal → power spectrogram.
pub fn spectrogram(signal: &AudioSignal, config: &StftConfig) -> Result<TfMatrix> {
    power_spectrogram(&stft(signal, config)?, config, signal.sample_rate_hz())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Direct evaluation of the windowed DFT sum, frame by frame.
    fn brute_force(x: &[f64], config: &StftConfig) -> ComplexMatrix {
        let n = config.frame_size_n;
        let w = make_window(config.window, n).unwrap();
        let frames = config.num_frames(x.len());
        let mut out = ComplexMatrix::zeros(n / 2 + 1, frames);
        for m in 0..frames {
            for k in 0..=n / 2 {
                let mut acc = Complex64::new(0.0, 0.0);
                for r in 0..n {
                    let idx = (m * config.hop_size_h + r) as isize - (n / 2) as isize;
                    let xv = if idx >= 0 && (idx as usize) < x.len() { x[idx as usize] } else { 0.0 };
                    let phase = -2.0 * PI * (k * r) as f64 / n as f64;
                    acc += xv * w[r] * Complex64::from_polar(1.0, phase);
                }
                out.row_mut(k)[m] = acc;
            }
        }
        out
    }

    fn sig(x: Vec<f64>) -> AudioSignal {
        AudioSignal::new(x, 16_000).unwrap()
    }

    #[test]
    fn window_examples() {
        assert_eq!(make_window(WindowKind::Rectangular, 4).unwrap(), vec![1.0; 4]);
        let h = make_window(WindowKind::Hann, 4).unwrap();
        for (a, b) in h.iter().zip([0.0, 0.5, 1.0, 0.5]) {
            assert!((a - b).abs() < 1e-15);
        }
        for n in 1..20 {
            assert_eq!(make_window(WindowKind::Hann, n).unwrap()[0], 0.0);
        }
        assert!(make_window(WindowKind::Hann, 0).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(StftConfig { hop_size_h: 0, ..StftConfig::default() }.validate().is_err());
        assert!(StftConfig { hop_size_h: 2048, ..StftConfig::default() }.validate().is_err());
        assert!(StftConfig { frame_size_n: 0, ..StftConfig::default() }.validate().is_err());
        assert_eq!(StftConfig::default().hop_size_h, 512);
    }

    #[test]
    fn paper_shape() {
        let m = stft(&sig(vec![0.1; 160_000]), &StftConfig::default()).unwrap();
        assert_eq!(m.shape(), (513, 313));
    }

    #[test]
    fn dc_signal_concentrates_in_bin_zero() {
        let config = StftConfig {
            window: WindowKind::Rectangular,
            ..StftConfig::with_frame(32)
        };
        let m = stft(&sig(vec![1.0; 320]), &config).unwrap();
        for col in 1..m.cols() - 1 {
            assert!((m.get(0, col).re - 32.0).abs() < 1e-9);
            for k in 1..m.rows() {
                assert!(m.get(k, col).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn tone_peaks_at_bin_64() {
        let x: Vec<f64> = (0..16_000)
            .map(|n| (2.0 * PI * 1000.0 * n as f64 / 16_000.0).sin())
            .collect();
        let config = StftConfig::default();
        let m = stft(&sig(x.clone()), &config).unwrap();
        let oracle = brute_force(&x, &config);
        for col in 2..m.cols() - 2 {
            let peak = (0..m.rows())
                .max_by(|&a, &b| m.get(a, col).norm().total_cmp(&m.get(b, col).norm()))
                .unwrap();
            assert_eq!(peak, 64);
        }
        assert!(m.max_abs_diff(&oracle) < 1e-9 * oracle.max_norm().max(1.0));
    }

    #[test]
    fn power_values_and_axes() {
        let config = StftConfig::with_frame(4);
        let c = ComplexMatrix::from_vec(
            3,
            1,
            vec![Complex64::new(3.0, 4.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)],
        )
        .unwrap();
        let p = power_spectrogram(&c, &config, 16_000).unwrap();
        assert_eq!(p.get(0, 0), 25.0);
        assert_eq!(p.kind(), TfKind::Spectrogram);
        assert_eq!(p.time_step_s(), 2.0 / 16_000.0);

        let zero = ComplexMatrix::zeros(513, 3);
        let p = power_spectrogram(&zero, &StftConfig::default(), 16_000).unwrap();
        assert!(p.values().iter().all(|v| *v == 0.0));
        assert_eq!(p.row_coords()[64], 1000.0);
    }

    #[test]
    fn parseval_on_rectangular_frames() {
        let x: Vec<f64> = (0..512).map(|i| ((i * 37 % 101) as f64 / 50.0) - 1.0).collect();
        let config = StftConfig {
            frame_size_n: 64,
            hop_size_h: 64,
            window: WindowKind::Rectangular,
            center_pad: true,
        };
        let window = make_window(config.window, 64).unwrap();
        let spectra = full_spectra(&sig(x.clone()), &config).unwrap();
        for (m, spectrum) in spectra.iter().enumerate() {
            let frame = windowed_frame(&x, &config, &window, m);
            let time_energy: f64 = frame.iter().map(|v| v * v).sum();
            let freq_energy: f64 = spectrum.iter().map(|z| z.norm_sqr()).sum();
            let expected = 64.0 * time_energy;
            assert!((freq_energy - expected).abs() <= 1e-6 * expected.max(1e-12));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn shape_law(m in 1usize..3000, log_n in 2u32..11, hop_div in 1usize..5) {
            let n = 1usize << log_n;
            let config = StftConfig { hop_size_h: (n / hop_div).max(1), ..StftConfig::with_frame(n) };
            let out = stft(&sig(vec![0.5; m]), &config).unwrap();
            prop_assert_eq!(out.shape(), (n / 2 + 1, m / config.hop_size_h + 1));
        }

        #[test]
        fn matches_direct_sum(
            x in prop::collection::vec(-1.0f64..1.0, 1..256),
            log_n in 2u32..7,
            hann in any::<bool>(),
        ) {
            let config = StftConfig {
                window: if hann { WindowKind::Hann } else { WindowKind::Rectangular },
                ..StftConfig::with_frame(1 << log_n)
            };
            let fast = stft(&sig(x.clone()), &config).unwrap();
            let slow = brute_force(&x, &config);
            prop_assert!(fast.max_abs_diff(&slow) <= 1e-9);
        }

        #[test]
        fn homogeneity(x in prop::collection::vec(-1.0f64..1.0, 16..200), alpha in -5.0f64..5.0) {
            let config = StftConfig::with_frame(16);
            let base = stft(&sig(x.clone()), &config).unwrap();
            let scaled = stft(&sig(x.iter().map(|v| v * alpha).collect()), &config).unwrap();
            for (a, b) in base.data().iter().zip(scaled.data()) {
                prop_assert!((a * alpha - b).norm() <= 1e-9);
            }
        }

        #[test]
        fn hop_shift_moves_one_column(x in prop::collection::vec(-1.0f64..1.0, 64..200)) {
            let config = StftConfig::with_frame(16);
            let h = config.hop_size_h;
            let mut delayed = vec![0.0; h];
            delayed.extend_from_slice(&x);
            let a = spectrogram(&sig(x.clone()), &config).unwrap();
            let b = spectrogram(&sig(delayed), &config).unwrap();
            for col in 1..a.cols() - 1 {
                for k in 0..a.rows() {
                    prop_assert!((a.get(k, col) - b.get(k, col + 1)).abs() <= 1e-9);
                }
            }
        }
    }
}
