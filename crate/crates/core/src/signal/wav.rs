use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::AudioSignal;
use crate::error::{Error, Result};

/// Reads a 16-bit integer or 32-bit float PCM WAV file as a mono signal.
///
/// Multichannel frames are downmixed by arithmetic mean. Integer samples
/// are scaled by 1/32768.
pub fn load_wav(path: impl AsRef<Path>) -> Result<AudioSignal> {
    let path = path.as_ref();
    let reader = WavReader::open(path).map_err(|e| match e {
        hound::Error::IoError(source) => Error::io(path, source),
        hound::Error::Unsupported => Error::UnsupportedEncoding {
            path: path.into(),
            format: "unsupported WAV format tag".into(),
        },
        other => Error::UnreadableWav {
            path: path.into(),
            reason: other.to_string(),
        },
    })?;
    let spec = reader.spec();
    let channels = usize::from(spec.channels.max(1));
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => reader
            .into_samples::<i16>()
            .map(|s| s.map(|v| f64::from(v) / 32768.0))
            .collect::<std::result::Result<_, _>>(),
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>(),
        (fmt, bits) => {
            return Err(Error::UnsupportedEncoding {
                path: path.into(),
                format: format!("{bits}-bit {fmt:?}"),
            })
        }
    }
    .map_err(|e| Error::UnreadableWav {
        path: path.into(),
        reason: e.to_string(),
    })?;

    if interleaved.len() < channels {
        return Err(Error::EmptyPayload { path: path.into() });
    }
    let mono: Vec<f64> = interleaved
        .chunks_exact(channels)
        .map(|frame| frame.iter().sum::<f64>() / channels as f64)
        .collect();
    AudioSignal::new(mono, spec.sample_rate)
}

/// Writes a mono 16-bit PCM WAV. Samples are clamped to the i16 range.
pub fn write_wav(signal: &AudioSignal, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let spec = WavSpec {
        channels: 1,
        sample_rate: signal.sample_rate_hz(),
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let wrap = |e: hound::Error| match e {
        hound::Error::IoError(source) => Error::io(path, source),
        other => Error::UnreadableWav {
            path: path.into(),
            reason: other.to_string(),
        },
    };
    let mut writer = WavWriter::create(path, spec).map_err(wrap)?;
    for &s in signal.samples() {
        let v = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        writer.write_sample(v).map_err(wrap)?;
    }
    writer.finalize().map_err(wrap)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_raw<S: hound::Sample + Copy>(path: &Path, spec: WavSpec, data: &[S]) {
        let mut w = WavWriter::create(path, spec).unwrap();
        for &s in data {
            w.write_sample(s).unwrap();
        }
        w.finalize().unwrap();
    }

    fn spec(channels: u16, bits: u16, format: SampleFormat) -> WavSpec {
        WavSpec {
            channels,
            sample_rate: 16_000,
            bits_per_sample: bits,
            sample_format: format,
        }
    }

    #[test]
    fn reads_int16_mono() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.wav");
        write_raw(&p, spec(1, 16, SampleFormat::Int), &[16384i16, -16384]);
        let s = load_wav(&p).unwrap();
        assert_eq!(s.samples(), &[0.5, -0.5]);
        assert_eq!(s.sample_rate_hz(), 16_000);
    }

    #[test]
    fn downmixes_stereo_float() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.wav");
        write_raw(&p, spec(2, 32, SampleFormat::Float), &[1.0f32, 0.0]);
        assert_eq!(load_wav(&p).unwrap().samples(), &[0.5]);
    }

    #[test]
    fn ten_seconds_at_16k() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("long.wav");
        write_raw(&p, spec(1, 16, SampleFormat::Int), &vec![1i16; 160_000]);
        assert_eq!(load_wav(&p).unwrap().len(), 160_000);
    }

    #[test]
    fn error_kinds_are_distinct() {
        let dir = tempfile::tempdir().unwrap();

        let missing = dir.path().join("missing.wav");
        assert!(matches!(load_wav(&missing), Err(Error::Io { .. })));

        let garbage = dir.path().join("garbage.wav");
        std::fs::write(&garbage, b"definitely not a riff file").unwrap();
        assert!(matches!(load_wav(&garbage), Err(Error::UnreadableWav { .. })));

        let pcm24 = dir.path().join("24.wav");
        write_raw(&pcm24, spec(1, 24, SampleFormat::Int), &[1i32, 2]);
        assert!(matches!(
            load_wav(&pcm24),
            Err(Error::UnsupportedEncoding { .. })
        ));

        let empty = dir.path().join("empty.wav");
        write_raw::<i16>(&empty, spec(1, 16, SampleFormat::Int), &[]);
        assert!(matches!(load_wav(&empty), Err(Error::EmptyPayload { .. })));
    }

    #[test]
    fn write_then_read() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("rt.wav");
        let s = AudioSignal::new(vec![0.5, -0.25, 0.0, -1.0], 8_000).unwrap();
        write_wav(&s, &p).unwrap();
        let back = load_wav(&p).unwrap();
        assert_eq!(back.samples(), s.samples());
        assert_eq!(back.sample_rate_hz(), 8_000);
    }
}
