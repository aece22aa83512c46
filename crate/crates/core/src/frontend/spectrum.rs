use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

/// Hamming window `0.54 - 0.46 cos(2πn/(len-1))`.
pub fn hamming_window(len: usize) -> Vec<f64> {
    if len == 1 {
        return vec![1.0];
    }
    let denom = (len - 1) as f64;
    (0..len)
        .map(|n| 0.54 - 0.46 * (2.0 * PI * n as f64 / denom).cos())
        .collect()
}

/// Number of non-redundant bins of a real DFT of length `dft_len`.
pub fn half_spectrum_len(dft_len: usize) -> usize {
    dft_len / 2 + 1
}

/// Power spectrum of a real frame at a fixed DFT length. The plan is built
/// once; `compute` may be called concurrently.
pub struct PowerSpectrum {
    dft_len: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for PowerSpectrum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PowerSpectrum").field("dft_len", &self.dft_len).finish()
    }
}

impl PowerSpectrum {
    pub fn new(dft_len: usize) -> Self {
        assert!(dft_len > 0, "dft length must be positive");
        let fft = FftPlanner::new().plan_fft_forward(dft_len);
        Self { dft_len, fft }
    }

    pub fn dft_len(&self) -> usize {
        self.dft_len
    }

    pub fn n_bins(&self) -> usize {
        half_spectrum_len(self.dft_len)
    }

    /// `|X[k]|²` for `k` in the half spectrum. Frames shorter than the DFT
    /// length are zero-padded.
    pub fn compute(&self, frame: &[f64]) -> Vec<f64> {
        assert!(
            frame.len() <= self.dft_len,
            "frame of {} samples exceeds dft length {}",
            frame.len(),
            self.dft_len
        );
        let mut buf: Vec<Complex<f64>> = Vec::with_capacity(self.dft_len);
        buf.extend(frame.iter().map(|&x| Complex::new(x, 0.0)));
        buf.resize(self.dft_len, Complex::new(0.0, 0.0));
        self.fft.process(&mut buf);
        buf.truncate(self.n_bins());
        buf.into_iter().map(|c| c.norm_sqr()).collect()
    }
}

/// One-shot power spectrum; plans the transform on every call.
pub fn power_spectrum(frame: &[f64], dft_len: usize) -> Vec<f64> {
    PowerSpectrum::new(dft_len).compute(frame)
}
