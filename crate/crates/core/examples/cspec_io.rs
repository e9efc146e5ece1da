//! Writes a spectrogram to CSPEC, reads it back, and shows the header.
//!
//! cargo run --release --example cspec_io -- [path]

use std::path::PathBuf;

use spectral_consistency::io::cspec::{self, CspecHeader};
use spectral_consistency::mixer::synth_test_signals;
use spectral_consistency::{Stft, StftConfig};

fn main() -> spectral_consistency::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("example.cspec"));
    let stft = Stft::new(StftConfig::default())?;
    let spec = stft.forward(&synth_test_signals(1, 0.5, 16_000)?.speech)?;

    cspec::write_cspec(&path, &spec)?;
    let back = cspec::read_cspec(&path)?;
    println!("{}", serde_json::to_string(&CspecHeader::of(&back))?);

    // The payload is f32, so the round trip is exact against the f32-rounded input.
    let expected = spec.quantized_f32();
    let identical = back.data() == expected.data();
    let drift = back.sub(&spec)?.norm() / spec.norm();
    println!(
        "{}: bit-exact vs f32 rounding {identical}, relative drift from f64 {drift:.2e}",
        path.display()
    );

    let bytes = std::fs::read(&path)
        .map_err(|e| spectral_consistency::Error::InvalidArgument(e.to_string()))?;
    let truncated = &bytes[..bytes.len() - 8];
    println!("truncated file: {}", cspec::decode(truncated).unwrap_err());
    Ok(())
}
