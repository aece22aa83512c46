use crate::error::{Error, Result};

use super::spectrum::half_spectrum_len;
use super::FrontendConfig;

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Triangular filters with unit peak, centers equally spaced on the mel scale.
#[derive(Debug, Clone, PartialEq)]
pub struct MelFilterbank {
    /// `n_filters` rows of `n_bins` weights.
    weights: Vec<Vec<f64>>,
    /// Edge frequencies in Hz: `n_filters + 2` points; filter `j` spans
    /// `edges[j]..edges[j + 2]` and peaks at `edges[j + 1]`.
    edges_hz: Vec<f64>,
}

impl MelFilterbank {
    pub fn n_filters(&self) -> usize {
        self.weights.len()
    }

    pub fn n_bins(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn centers_hz(&self) -> &[f64] {
        &self.edges_hz[1..self.edges_hz.len() - 1]
    }

    pub fn edges_hz(&self) -> &[f64] {
        &self.edges_hz
    }

    /// `e_j = Σ_i w_ji · P_i`.
    pub fn apply(&self, power: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .map(|row| row.iter().zip(power).map(|(w, p)| w * p).sum())
            .collect()
    }
}

/// Builds the filterbank for `cfg`. Fails if any filter would cover no DFT bin.
pub fn build_mel_filterbank(cfg: &FrontendConfig) -> Result<MelFilterbank> {
    cfg.validate()?;
    let n_bins = half_spectrum_len(cfg.dft_len);
    let bin_hz = cfg.sample_rate as f64 / cfg.dft_len as f64;
    let (mel_lo, mel_hi) = (hz_to_mel(cfg.mel_low), hz_to_mel(cfg.mel_high()));
    let step = (mel_hi - mel_lo) / (cfg.n_filters + 1) as f64;
    let edges_hz: Vec<f64> = (0..cfg.n_filters + 2)
        .map(|k| mel_to_hz(mel_lo + step * k as f64))
        .collect();

    let mut weights = Vec::with_capacity(cfg.n_filters);
    for j in 0..cfg.n_filters {
        let (left, center, right) = (edges_hz[j], edges_hz[j + 1], edges_hz[j + 2]);
        let row: Vec<f64> = (0..n_bins)
            .map(|i| {
                let f = i as f64 * bin_hz;
                if f <= left || f >= right {
                    0.0
                } else if f <= center {
                    (f - left) / (center - left)
                } else {
                    (right - f) / (right - center)
                }
            })
            .collect();
        if !row.iter().any(|&w| w > 0.0) {
            return Err(Error::Config(format!(
                "mel filter {j} ({left:.1}-{right:.1} Hz) covers no DFT bin; \
                 too many filters ({}) for {n_bins} bins",
                cfg.n_filters
            )));
        }
        weights.push(row);
    }
    Ok(MelFilterbank { weights, edges_hz })
}
