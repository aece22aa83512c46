//! Log mel filterbank front-end.
//!
//! PCM samples are cut into Hamming-windowed frames (504 samples every 160
//! at 16 kHz, i.e. 31.5 ms every 10 ms), transformed with a DFT of the frame
//! length, and reduced to 24 triangular mel-band energies on a natural-log
//! scale with a hard floor.

mod mel;
mod spectrum;
mod wav;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::frames::FrameSequence;

pub use mel::{build_mel_filterbank, hz_to_mel, mel_to_hz, MelFilterbank};
pub use spectrum::{half_spectrum_len, hamming_window, power_spectrum, PowerSpectrum};
pub use wav::{load_wav, write_wav, SampleBuffer};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FrontendConfig {
    pub sample_rate: u32,
    pub frame_len: usize,
    pub hop: usize,
    /// DFT length; equal to `frame_len` unless zero-padding is wanted.
    pub dft_len: usize,
    pub n_filters: usize,
    pub mel_low: f64,
    /// Upper mel edge in Hz; `None` means Nyquist.
    pub mel_high: Option<f64>,
    pub log_floor: f64,
}

impl Default for FrontendConfig {
    fn default() -> Self {
        Self {
            sample_rate: 16_000,
            frame_len: 504,
            hop: 160,
            dft_len: 504,
            n_filters: 24,
            mel_low: 0.0,
            mel_high: None,
            log_floor: 1e-10,
        }
    }
}

impl FrontendConfig {
    pub fn nyquist(&self) -> f64 {
        self.sample_rate as f64 / 2.0
    }

    pub fn mel_high(&self) -> f64 {
        self.mel_high.unwrap_or_else(|| self.nyquist())
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.sample_rate == 0 {
            return fail("sample_rate must be positive".into());
        }
        if self.frame_len == 0 || self.frame_len > self.dft_len {
            return fail(format!(
                "need 0 < frame_len ({}) <= dft_len ({})",
                self.frame_len, self.dft_len
            ));
        }
        if self.hop == 0 {
            return fail("hop must be at least 1".into());
        }
        if self.n_filters == 0 {
            return fail("n_filters must be at least 1".into());
        }
        let hi = self.mel_high();
        if !(self.mel_low >= 0.0 && self.mel_low < hi && hi <= self.nyquist()) {
            return fail(format!(
                "need 0 <= mel_low ({}) < mel_high ({hi}) <= nyquist ({})",
                self.mel_low,
                self.nyquist()
            ));
        }
        if self.log_floor.is_nan() || self.log_floor <= 0.0 {
            return fail("log_floor must be positive".into());
        }
        Ok(())
    }

    /// Stable short digest of the configuration, stored alongside models so
    /// that features from different front-ends are never mixed.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let hash = Sha256::digest(json.as_bytes());
        hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

/// Splits `buf` into frames of `cfg.frame_len` samples every `cfg.hop`.
/// A trailing partial frame is dropped.
pub fn frame_signal<'a>(buf: &'a SampleBuffer, cfg: &FrontendConfig) -> Result<Vec<&'a [i16]>> {
    if cfg.frame_len == 0 || cfg.hop == 0 {
        return Err(Error::Config("frame_len and hop must be positive".into()));
    }
    let len = buf.samples.len();
    if len < cfg.frame_len {
        return Err(Error::EmptyInput {
            len,
            frame_len: cfg.frame_len,
        });
    }
    let count = (len - cfg.frame_len) / cfg.hop + 1;
    Ok((0..count)
        .map(|k| &buf.samples[k * cfg.hop..k * cfg.hop + cfg.frame_len])
        .collect())
}

/// Reusable extraction pipeline: window, transform plan, and filterbank are
/// built once and shared across calls.
#[derive(Debug)]
pub struct FeatureExtractor {
    cfg: FrontendConfig,
    window: Vec<f64>,
    spectrum: PowerSpectrum,
    filterbank: MelFilterbank,
}

impl FeatureExtractor {
    pub fn new(cfg: FrontendConfig) -> Result<Self> {
        let filterbank = build_mel_filterbank(&cfg)?;
        Ok(Self {
            window: hamming_window(cfg.frame_len),
            spectrum: PowerSpectrum::new(cfg.dft_len),
            filterbank,
            cfg,
        })
    }

    pub fn config(&self) -> &FrontendConfig {
        &self.cfg
    }

    pub fn filterbank(&self) -> &MelFilterbank {
        &self.filterbank
    }

    /// Log filterbank vector of one raw frame.
    pub fn frame_features(&self, frame: &[i16]) -> Vec<f64> {
        let windowed: Vec<f64> = frame.iter().zip(&self.window).map(|(&s, &w)| s as f64 * w).collect();
        let power = self.spectrum.compute(&windowed);
        self.filterbank
            .apply(&power)
            .into_iter()
            .map(|e| e.max(self.cfg.log_floor).ln())
            .collect()
    }

    pub fn extract(&self, buf: &SampleBuffer) -> Result<FrameSequence> {
        if buf.sample_rate != self.cfg.sample_rate {
            return Err(Error::Config(format!(
                "buffer sample rate {} Hz does not match front-end rate {} Hz",
                buf.sample_rate, self.cfg.sample_rate
            )));
        }
        let frames = frame_signal(buf, &self.cfg)?;
        let mut out = FrameSequence::with_capacity(self.cfg.n_filters, frames.len());
        for f in frames {
            out.push(&self.frame_features(f))?;
        }
        Ok(out)
    }
}

pub fn extract_features(buf: &SampleBuffer, cfg: &FrontendConfig) -> Result<FrameSequence> {
    FeatureExtractor::new(cfg.clone())?.extract(buf)
}
