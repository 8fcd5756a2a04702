//! Write a synthesized signal as 16-bit PCM and read it back.
//!
//! ```text
//! cargo run --example wav_roundtrip [path.wav]
//! ```

use tfscope::signal::{load_wav, synthesize, write_wav, SynthKind, SynthSpec};

fn main() -> tfscope::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "target/wav_roundtrip.wav".into());
    let spec = SynthSpec {
        kind: SynthKind::MultiTonePlusImpulses { frequencies_hz: [500.0, 600.0], impulse_times_s: vec![0.48, 0.52] },
        duration_s: 1.0,
        noise_snr_db: None,
        seed: 0,
    };
    println!("{}", serde_json::to_string_pretty(&spec)?);
    let signal = synthesize(&spec, 16_000)?;
    let scaled = tfscope::signal::AudioSignal::new(signal.samples().iter().map(|v| v / signal.peak()).collect(), 16_000)?;
    write_wav(&scaled, &path)?;
    let back = load_wav(&path)?;
    let max_err = scaled.samples().iter().zip(back.samples()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("{} samples, max quantization error {max_err:.2e}", back.len());
    Ok(())
}
