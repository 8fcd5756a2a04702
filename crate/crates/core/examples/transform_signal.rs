//! Peak-normalize a signal and compute its spectrogram and scalogram.
//!
//! ```text
//! cargo run --release --example transform_signal [input.wav] [out_dir]
//! ```
//!
//! Without an input, a 1 kHz tone with a little noise is synthesized.

use std::path::PathBuf;

use tfscope::cwt::{scalogram_of, CwtConfig, CwtMethod};
use tfscope::signal::{load_wav, peak_normalize, synthesize, write_wav, SynthKind, SynthSpec};
use tfscope::stft::{spectrogram, StftConfig};
use tfscope::tf::{write_tfm, TfMatrix};

fn strongest_row(m: &TfMatrix) -> (usize, f64) {
    let means = m.row_means();
    let row = (0..means.len()).max_by(|&a, &b| means[a].total_cmp(&means[b])).unwrap();
    (row, m.row_coords()[row])
}

fn main() -> tfscope::Result<()> {
    let mut args = std::env::args().skip(1);
    let signal = match args.next() {
        Some(path) => load_wav(path)?,
        None => synthesize(
            &SynthSpec {
                kind: SynthKind::Tone { frequency_hz: 1_000.0, amplitude: 0.25 },
                duration_s: 1.0,
                noise_snr_db: Some(20.0),
                seed: 7,
            },
            16_000,
        )?,
    };
    let out_dir = PathBuf::from(args.next().unwrap_or_else(|| "target/transform_signal".into()));
    std::fs::create_dir_all(&out_dir).map_err(|e| tfscope::Error::io(&out_dir, e))?;

    let normalized = peak_normalize(&signal)?;
    println!("peak {:.4} -> {:.4}", signal.peak(), normalized.peak());
    write_wav(&normalized, out_dir.join("normalized.wav"))?;

    let stft_config = StftConfig::with_frame(1024);
    let spec = spectrogram(&normalized, &stft_config)?;
    let (row, hz) = strongest_row(&spec);
    println!("spectrogram {}x{}, strongest bin {row} ({hz:.1} Hz)", spec.rows(), spec.cols());
    write_tfm(&spec, out_dir.join("spectrogram.tfm"), serde_json::to_value(stft_config)?)?;

    let cwt_config = CwtConfig::default();
    let scal = scalogram_of(&normalized, &cwt_config, CwtMethod::Fft)?;
    let (row, scale) = strongest_row(&scal);
    println!("scalogram {}x{}, strongest row {row} (scale {scale})", scal.rows(), scal.cols());
    write_tfm(&scal, out_dir.join("scalogram.tfm"), serde_json::to_value(cwt_config)?)?;

    println!("wrote {}", out_dir.display());
    Ok(())
}
