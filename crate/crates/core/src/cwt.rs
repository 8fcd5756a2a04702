//! Discrete continuous wavelet transform with an analytic Morlet wavelet.
//!
//! For scale `a` and translation `k`:
//!
//! ```text
//! X(a, k) = (1/√a) · Σ_n x(n) · ψ*((n − k) / a),   |n − k| ≤ R(a)
//! ```
//!
//! where `R(a) = floor(support_radius · a)` and samples outside the signal
//! are zero. Translations run over `0, step, 2·step, … < M`.
//!
//! Two evaluation routes share this contract: [`cwt_direct`] evaluates the
//! sum literally and [`cwt_fft`] convolves each scale's sampled kernel with
//! the signal in the frequency domain.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::AudioSignal;
use crate::tf::{ComplexMatrix, RowAxis, TfKind, TfMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveletKind {
    AnalyticMorlet,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CwtConfig {
    pub scale_min: u32,
    pub scale_max: u32,
    pub translation_step: usize,
    pub wavelet: WaveletKind,
    pub omega0: f64,
    /// Kernel half-width in multiples of the scale.
    pub support_radius: f64,
}

impl Default for CwtConfig {
    fn default() -> Self {
        Self {
            scale_min: 2,
            scale_max: 129,
            translation_step: 1,
            wavelet: WaveletKind::AnalyticMorlet,
            omega0: 6.0,
            support_radius: 4.0,
        }
    }
}

impl CwtConfig {
    pub fn validate(&self) -> Result<()> {
        if self.scale_min < 1 || self.scale_max <= self.scale_min {
            return Err(Error::InvalidConfig(format!(
                "scale range {}..={} must satisfy 1 <= min < max",
                self.scale_min, self.scale_max
            )));
        }
        if self.translation_step == 0 {
            return Err(Error::InvalidConfig("translation step must be >= 1".into()));
        }
        if !(self.omega0.is_finite() && self.omega0 > 0.0) {
            return Err(Error::InvalidConfig("omega0 must be positive".into()));
        }
        if !(self.support_radius.is_finite() && self.support_radius > 0.0) {
            return Err(Error::InvalidConfig("support radius must be positive".into()));
        }
        Ok(())
    }

    pub fn scales(&self) -> impl Iterator<Item = u32> {
        self.scale_min..=self.scale_max
    }

    pub fn num_scales(&self) -> usize {
        (self.scale_max - self.scale_min + 1) as usize
    }

    /// `ceil(M / step)`.
    pub fn num_translations(&self, signal_len: usize) -> usize {
        signal_len.div_ceil(self.translation_step)
    }

    fn radius(&self, scale: u32) -> usize {
        (self.support_radius * f64::from(scale)).floor() as usize
    }
}

/// `π^(-1/4) · e^{jω₀t} · e^{-t²/2}`.
pub fn wavelet_eval(t: f64, omega0: f64) -> Complex64 {
    let envelope = PI.powf(-0.25) * (-0.5 * t * t).exp();
    Complex64::from_polar(envelope, omega0 * t)
}

/// Pseudo-frequency of a scale, for axis labels only.
pub fn scale_to_frequency(scale: f64, omega0: f64, sample_rate_hz: u32) -> f64 {
    omega0 / (2.0 * PI) * f64::from(sample_rate_hz) / scale
}

/// Conjugated kernel taps `ψ*(d/a)` for `d = -R..=R`, split into real and
/// imaginary parts.
fn kernel(scale: u32, config: &CwtConfig) -> (Vec<f64>, Vec<f64>) {
    let r = config.radius(scale) as isize;
    let a = f64::from(scale);
    (-r..=r)
        .map(|d| wavelet_eval(d as f64 / a, config.omega0).conj())
        .map(|z| (z.re, z.im))
        .unzip()
}

fn check_input(signal: &AudioSignal, config: &CwtConfig) -> Result<()> {
    config.validate()?;
    if signal.is_empty() {
        return Err(Error::InvalidSignal("CWT of an empty signal".into()));
    }
    Ok(())
}

/// Literal evaluation of the truncated sum, one row per scale.
pub fn cwt_direct(signal: &AudioSignal, config: &CwtConfig) -> Result<ComplexMatrix> {
    check_input(signal, config)?;
    let x = signal.samples();
    let len = x.len();
    let cols = config.num_translations(len);
    let mut out = ComplexMatrix::zeros(config.num_scales(), cols);
    for (row, scale) in config.scales().enumerate() {
        let (re, im) = kernel(scale, config);
        let r = config.radius(scale);
        let norm = 1.0 / f64::from(scale).sqrt();
        for (c, slot) in out.row_mut(row).iter_mut().enumerate() {
            let k = c * config.translation_step;
            // taps index t ↔ sample k + t - r
            let t_lo = r.saturating_sub(k);
            let t_hi = (len + r - k).min(2 * r + 1);
            let xs = &x[k + t_lo - r..k + t_hi - r];
            let (mut acc_re, mut acc_im) = (0.0, 0.0);
            for ((xv, wr), wi) in xs.iter().zip(&re[t_lo..t_hi]).zip(&im[t_lo..t_hi]) {
                acc_re += xv * wr;
                acc_im += xv * wi;
            }
            *slot = Complex64::new(acc_re * norm, acc_im * norm);
        }
    }
    Ok(out)
}

/// Smallest `2^a·3^b·5^c` that is `>= n`.
fn fast_len(n: usize) -> usize {
    let mut best = n.next_power_of_two();
    let mut p5 = 1;
    while p5 < best {
        let mut p35 = p5;
        while p35 < best {
            let mut p = p35;
            while p < n {
                p *= 2;
            }
            best = best.min(p);
            p35 *= 3;
        }
        p5 *= 5;
    }
    best
}

/// Frequency-domain evaluation: per scale, the signal is convolved with the
/// time-reversed conjugated kernel and the result is decimated by the
/// translation step.
pub fn cwt_fft(signal: &AudioSignal, config: &CwtConfig) -> Result<ComplexMatrix> {
    check_input(signal, config)?;
    let x = signal.samples();
    let len = x.len();
    let cols = config.num_translations(len);
    let r_max = config.radius(config.scale_max);
    let size = fast_len(len + 2 * r_max + 1);

    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(size);
    let inverse = planner.plan_fft_inverse(size);
    let mut scratch = vec![Complex64::new(0.0, 0.0); forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len())];

    let mut spectrum: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    spectrum.resize(size, Complex64::new(0.0, 0.0));
    forward.process_with_scratch(&mut spectrum, &mut scratch);

    let mut out = ComplexMatrix::zeros(config.num_scales(), cols);
    let mut buf = vec![Complex64::new(0.0, 0.0); size];
    for (row, scale) in config.scales().enumerate() {
        let (re, im) = kernel(scale, config);
        let r = config.radius(scale);
        // h[j] = g[r - j]: reversed taps, so (x * h)[k + r] = Σ_d x[k+d]·g[d]
        buf.fill(Complex64::new(0.0, 0.0));
        for (j, slot) in buf.iter_mut().take(2 * r + 1).enumerate() {
            *slot = Complex64::new(re[2 * r - j], im[2 * r - j]);
        }
        forward.process_with_scratch(&mut buf, &mut scratch);
        for (b, s) in buf.iter_mut().zip(&spectrum) {
            *b *= s;
        }
        inverse.process_with_scratch(&mut buf, &mut scratch);
        let norm = 1.0 / (f64::from(scale).sqrt() * size as f64);
        for (c, slot) in out.row_mut(row).iter_mut().enumerate() {
            *slot = buf[c * config.translation_step + r] * norm;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CwtMethod {
    Direct,
    #[default]
    Fft,
}

pub fn cwt(signal: &AudioSignal, config: &CwtConfig, method: CwtMethod) -> Result<ComplexMatrix> {
    match method {
        CwtMethod::Direct => cwt_direct(signal, config),
        CwtMethod::Fft => cwt_fft(signal, config),
    }
}

/// `|X(a,k)|²` with ascending scale rows and columns `step/fs` apart.
pub fn scalogram(coeffs: &ComplexMatrix, config: &CwtConfig, sample_rate_hz: u32) -> Result<TfMatrix> {
    config.validate()?;
    if coeffs.rows() != config.num_scales() {
        return Err(Error::Shape(format!(
            "{} coefficient rows for {} scales",
            coeffs.rows(),
            config.num_scales()
        )));
    }
    if sample_rate_hz == 0 {
        return Err(Error::InvalidConfig("sample rate must be positive".into()));
    }
    TfMatrix::new(
        coeffs.rows(),
        coeffs.cols(),
        coeffs.power(),
        RowAxis::Scale,
        config.scales().map(f64::from).collect(),
        config.translation_step as f64 / f64::from(sample_rate_hz),
        TfKind::Scalogram,
    )
}

/// Signal → scalogram via the chosen evaluation route.
pub fn scalogram_of(signal: &AudioSignal, config: &CwtConfig, method: CwtMethod) -> Result<TfMatrix> {
    scalogram(&cwt(signal, config, method)?, config, signal.sample_rate_hz())
}
