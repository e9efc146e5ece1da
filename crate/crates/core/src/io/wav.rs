use std::io::Cursor;
use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::error::{Error, Result};
use crate::types::Waveform;

/// Reads a mono PCM16 or IEEE float32 WAV file.
pub fn read_wav(path: &Path) -> Result<Waveform> {
    let wav_err = |source| Error::Wav {
        path: path.to_path_buf(),
        source,
    };
    let reader = WavReader::open(path).map_err(wav_err)?;
    let spec = reader.spec();
    let unsupported = |reason: String| Error::UnsupportedWav {
        path: path.to_path_buf(),
        reason,
    };
    if spec.channels != 1 {
        return Err(unsupported(format!(
            "{} channels, only mono is supported",
            spec.channels
        )));
    }
    let samples: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => reader
            .into_samples::<i16>()
            .map(|s| s.map(|v| v as f64 / 32_768.0))
            .collect::<std::result::Result<_, _>>()
            .map_err(wav_err)?,
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(|v| v as f64))
            .collect::<std::result::Result<_, _>>()
            .map_err(wav_err)?,
        (fmt, bits) => {
            return Err(unsupported(format!(
                "{bits}-bit {fmt:?} samples; expected PCM16 or float32"
            )))
        }
    };
    Waveform::new(samples, spec.sample_rate).map_err(|e| unsupported(e.to_string()))
}

/// Encodes a waveform as a mono float32 WAV.
pub fn encode_wav_f32(x: &Waveform) -> Result<Vec<u8>> {
    let spec = WavSpec {
        channels: 1,
        sample_rate: x.sample_rate(),
        bits_per_sample: 32,
        sample_format: SampleFormat::Float,
    };
    let mut cursor = Cursor::new(Vec::new());
    let to_err = |source| Error::Wav {
        path: "<memory>".into(),
        source,
    };
    {
        let mut w = WavWriter::new(&mut cursor, spec).map_err(to_err)?;
        for &s in x.samples() {
            w.write_sample(s as f32).map_err(to_err)?;
        }
        w.finalize().map_err(to_err)?;
    }
    Ok(cursor.into_inner())
}

/// Encodes a waveform as mono PCM16, clipping to `[-1, 1)`.
pub fn encode_wav_pcm16(x: &Waveform) -> Result<Vec<u8>> {
    let spec = WavSpec {
        channels: 1,
        sample_rate: x.sample_rate(),
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut cursor = Cursor::new(Vec::new());
    let to_err = |source| Error::Wav {
        path: "<memory>".into(),
        source,
    };
    {
        let mut w = WavWriter::new(&mut cursor, spec).map_err(to_err)?;
        for &s in x.samples() {
            let v = (s * 32_768.0).round().clamp(-32_768.0, 32_767.0) as i16;
            w.write_sample(v).map_err(to_err)?;
        }
        w.finalize().map_err(to_err)?;
    }
    Ok(cursor.into_inner())
}

pub fn write_wav_f32(path: &Path, x: &Waveform) -> Result<()> {
    super::write_atomic(path, &encode_wav_f32(x)?)
}

pub fn write_wav_pcm16(path: &Path, x: &Waveform) -> Result<()> {
    super::write_atomic(path, &encode_wav_pcm16(x)?)
}
