use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::TimeSeries;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Smoothing {
    None,
    /// Boxcar average over a window `octaves` wide, centred in log-frequency.
    LogBoxcar { octaves: f64 },
}

/// One-sided Fourier amplitude spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    freqs: Vec<f64>,
    amplitudes: Vec<f64>,
    smoothing: Smoothing,
}

impl Spectrum {
    pub fn new(freqs: Vec<f64>, amplitudes: Vec<f64>, smoothing: Smoothing) -> Result<Self> {
        if freqs.len() != amplitudes.len() {
            return Err(Error::InvalidParameter(
                "spectrum frequency and amplitude lengths differ".into(),
            ));
        }
        if freqs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "spectrum frequencies must be strictly increasing".into(),
            ));
        }
        if amplitudes.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return Err(Error::InvalidParameter(
                "spectral amplitudes must be finite and non-negative".into(),
            ));
        }
        Ok(Self {
            freqs,
            amplitudes,
            smoothing,
        })
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn smoothing(&self) -> Smoothing {
        self.smoothing
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    /// `∫|X(f)|² df` over positive and negative frequencies, reconstructed
    /// from the one-sided bins (DC and, for even lengths, Nyquist counted once).
    pub fn two_sided_energy(&self, n_samples: usize) -> f64 {
        if self.freqs.len() < 2 {
            return 0.0;
        }
        let df = self.freqs[1] - self.freqs[0];
        let last = self.amplitudes.len() - 1;
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(k, a)| {
                let weight = if k == 0 || (n_samples % 2 == 0 && k == last) {
                    1.0
                } else {
                    2.0
                };
                weight * a * a
            })
            .sum::<f64>()
            * df
    }
}

/// DFT amplitude scaled by `dt`, so a sinusoid of unit amplitude over a
/// record of length `T` peaks near `T/2`.
///
/// `smoothing_octaves <= 0` disables smoothing.
pub fn fourier_amplitude(ts: &TimeSeries, smoothing_octaves: f64) -> Result<Spectrum> {
    let n = ts.len();
    let dt = ts.dt();
    let mut buf: Vec<Complex64> = ts
        .samples()
        .iter()
        .map(|&x| Complex64::new(x, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let n_half = n / 2 + 1;
    let df = 1.0 / (n as f64 * dt);
    let freqs: Vec<f64> = (0..n_half).map(|k| k as f64 * df).collect();
    let raw: Vec<f64> = buf[..n_half].iter().map(|c| c.norm() * dt).collect();

    if smoothing_octaves <= 0.0 {
        return Spectrum::new(freqs, raw, Smoothing::None);
    }
    let half = 2f64.powf(smoothing_octaves / 2.0);
    let mut smoothed = raw.clone();
    let (mut lo, mut hi) = (1usize, 1usize);
    let mut window_sum = 0.0;
    // sliding window: both edges move monotonically with k
    for k in 1..n_half {
        let f = freqs[k];
        while hi < n_half && freqs[hi] <= f * half {
            window_sum += raw[hi];
            hi += 1;
        }
        while lo < k && freqs[lo] < f / half {
            window_sum -= raw[lo];
            lo += 1;
        }
        smoothed[k] = (window_sum / (hi - lo) as f64).max(0.0);
    }
    Spectrum::new(
        freqs,
        smoothed,
        Smoothing::LogBoxcar {
            octaves: smoothing_octaves,
        },
    )
}
