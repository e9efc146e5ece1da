//! CSPEC: a minimal complex-spectrogram container.
//!
//! Layout:
//!
//! ```text
//! CSPEC1\n
//! {"frames":T,"bins":F,"sample_rate":R,"window_length":W,"hop":H,"fft_length":N,"original_length":L}\n
//! T·F·2 little-endian f32 values, interleaved re/im, frame-major
//! ```

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{validate_config, ComplexSpectrogram, StftConfig};

pub const MAGIC: &[u8] = b"CSPEC1\n";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CspecHeader {
    pub frames: usize,
    pub bins: usize,
    pub sample_rate: u32,
    pub window_length: usize,
    pub hop: usize,
    pub fft_length: usize,
    pub original_length: usize,
}

impl CspecHeader {
    pub fn of(spec: &ComplexSpectrogram) -> Self {
        let c = spec.config();
        Self {
            frames: spec.frames(),
            bins: spec.bins(),
            sample_rate: c.sample_rate,
            window_length: c.window_length,
            hop: c.hop,
            fft_length: c.fft_length,
            original_length: spec.original_length(),
        }
    }

    pub fn config(&self) -> StftConfig {
        StftConfig {
            window_length: self.window_length,
            hop: self.hop,
            fft_length: self.fft_length,
            sample_rate: self.sample_rate,
        }
    }

    pub fn payload_len(&self) -> usize {
        self.frames * self.bins * 2 * 4
    }
}

/// Serializes a spectrogram; components are rounded to `f32`.
pub fn encode(spec: &ComplexSpectrogram) -> Result<Vec<u8>> {
    let header = serde_json::to_string(&CspecHeader::of(spec))?;
    let mut out = Vec::with_capacity(MAGIC.len() + header.len() + 1 + spec.data().len() * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(header.as_bytes());
    out.push(b'\n');
    for z in spec.data() {
        out.extend_from_slice(&(z.re as f32).to_le_bytes());
        out.extend_from_slice(&(z.im as f32).to_le_bytes());
    }
    Ok(out)
}

pub fn decode(bytes: &[u8]) -> Result<ComplexSpectrogram> {
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        let offset = bytes
            .iter()
            .zip(MAGIC)
            .position(|(a, b)| a != b)
            .unwrap_or(bytes.len().min(MAGIC.len()));
        return Err(Error::Parse {
            offset,
            message: "missing CSPEC1 magic".into(),
        });
    }
    let start = MAGIC.len();
    let newline = bytes[start..]
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Parse {
            offset: bytes.len(),
            message: "header line is not terminated".into(),
        })?;
    let header_bytes = &bytes[start..start + newline];
    let header: CspecHeader = serde_json::from_slice(header_bytes).map_err(|e| Error::Parse {
        offset: start + json_error_offset(header_bytes, &e),
        message: format!("invalid header: {e}"),
    })?;
    let config = header.config();
    validate_config(&config).map_err(|e| Error::Parse {
        offset: start,
        message: format!("invalid header: {e}"),
    })?;
    if header.bins != config.bins() {
        return Err(Error::Parse {
            offset: start,
            message: format!(
                "header declares {} bins but fft_length {} implies {}",
                header.bins,
                header.fft_length,
                config.bins()
            ),
        });
    }
    let payload = &bytes[start + newline + 1..];
    let expected = header.payload_len();
    if payload.len() != expected {
        return Err(Error::TruncatedPayload {
            expected,
            actual: payload.len(),
        });
    }
    let data: Vec<Complex64> = payload
        .chunks_exact(8)
        .map(|c| {
            let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
            Complex64::new(re as f64, im as f64)
        })
        .collect();
    ComplexSpectrogram::new(data, header.frames, config, header.original_length).map_err(|e| {
        Error::Parse {
            offset: start + newline + 1,
            message: e.to_string(),
        }
    })
}

fn json_error_offset(line: &[u8], err: &serde_json::Error) -> usize {
    // serde_json reports 1-based line/column; the header is a single line.
    if err.line() <= 1 {
        err.column().saturating_sub(1).min(line.len())
    } else {
        line.len()
    }
}

pub fn write_cspec(path: &Path, spec: &ComplexSpectrogram) -> Result<()> {
    super::write_atomic(path, &encode(spec)?)
}

pub fn read_cspec(path: &Path) -> Result<ComplexSpectrogram> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}
