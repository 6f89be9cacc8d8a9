//! Butterworth band-pass design as cascaded second-order sections.
//!
//! The analog low-pass prototype is shifted to a band-pass, mapped through
//! the bilinear transform with pre-warped edges, and split into biquads whose
//! numerators are all `1 - z^-2` (one zero at DC, one at Nyquist).

use std::f64::consts::PI;

use num_complex::Complex64;

use super::TimeSeries;
use crate::error::{Error, Result};

/// Second-order section `(b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Biquad {
    fn run(&self, x: &mut [f64]) {
        // transposed direct form II
        let (mut s1, mut s2) = (0.0, 0.0);
        for v in x.iter_mut() {
            let input = *v;
            let out = self.b[0] * input + s1;
            s1 = self.b[1] * input - self.a[0] * out + s2;
            s2 = self.b[2] * input - self.a[1] * out;
            *v = out;
        }
    }

    fn response(&self, z_inv: Complex64) -> Complex64 {
        let num = self.b[0] + z_inv * (self.b[1] + z_inv * self.b[2]);
        let den = 1.0 + z_inv * (self.a[0] + z_inv * self.a[1]);
        num / den
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ButterworthBandpass {
    sections: Vec<Biquad>,
    f_lo: f64,
    f_hi: f64,
    fs: f64,
}

impl ButterworthBandpass {
    /// Designs an `order`-th order prototype band-pass (2·order poles).
    pub fn design(f_lo: f64, f_hi: f64, order: usize, fs: f64) -> Result<Self> {
        let nyquist = 0.5 * fs;
        if !(f_lo > 0.0 && f_lo < f_hi && f_hi < nyquist) {
            return Err(Error::BandOutOfRange {
                lo: f_lo,
                hi: f_hi,
                nyquist,
            });
        }
        if order == 0 {
            return Err(Error::InvalidParameter("filter order must be >= 1".into()));
        }

        let warp = |f: f64| 2.0 * fs * (PI * f / fs).tan();
        let (w_lo, w_hi) = (warp(f_lo), warp(f_hi));
        let bw = w_hi - w_lo;
        let w0 = (w_lo * w_hi).sqrt();

        let n = order as f64;
        let mut poles = Vec::with_capacity(2 * order);
        for k in 0..order {
            let theta = PI * (2.0 * k as f64 + n + 1.0) / (2.0 * n);
            let p = Complex64::from_polar(1.0, theta);
            let half = p * (bw / 2.0);
            let disc = (half * half - w0 * w0).sqrt();
            for s in [half + disc, half - disc] {
                // bilinear: z = (2fs + s) / (2fs - s)
                poles.push((2.0 * fs + s) / (2.0 * fs - s));
            }
        }

        let sections = pair_poles(&poles)
            .into_iter()
            .map(|(a1, a2)| Biquad {
                b: [1.0, 0.0, -1.0],
                a: [a1, a2],
            })
            .collect::<Vec<_>>();

        let mut filt = Self {
            sections,
            f_lo,
            f_hi,
            fs,
        };
        // unit gain at the digital image of the geometric centre frequency
        let w_c = 2.0 * (w0 / (2.0 * fs)).atan();
        let g = filt.response_at(w_c / (2.0 * PI) * fs).norm();
        let per_section = g.powf(-1.0 / filt.sections.len() as f64);
        for s in &mut filt.sections {
            for b in &mut s.b {
                *b *= per_section;
            }
        }
        Ok(filt)
    }

    pub fn sections(&self) -> &[Biquad] {
        &self.sections
    }

    pub fn band(&self) -> (f64, f64) {
        (self.f_lo, self.f_hi)
    }

    /// Complex frequency response of a single pass at `freq` Hz.
    pub fn response_at(&self, freq: f64) -> Complex64 {
        let z_inv = Complex64::from_polar(1.0, -2.0 * PI * freq / self.fs);
        self.sections
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, s| acc * s.response(z_inv))
    }

    /// Causal single pass, zero initial state.
    pub fn filter(&self, x: &mut [f64]) {
        for s in &self.sections {
            s.run(x);
        }
    }

    /// Forward-backward pass over an odd-reflected extension of the input.
    pub fn filtfilt(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let pad = (3 * (2 * self.sections.len() + 1)).min(n - 1);
        let mut ext = Vec::with_capacity(n + 2 * pad);
        for i in (1..=pad).rev() {
            ext.push(2.0 * x[0] - x[i]);
        }
        ext.extend_from_slice(x);
        for i in 1..=pad {
            ext.push(2.0 * x[n - 1] - x[n - 1 - i]);
        }
        self.filter(&mut ext);
        ext.reverse();
        self.filter(&mut ext);
        ext.reverse();
        ext[pad..pad + n].to_vec()
    }
}

/// Groups conjugate-closed poles into `(a1, a2)` denominator pairs.
fn pair_poles(poles: &[Complex64]) -> Vec<(f64, f64)> {
    let tol = 1e-12;
    let mut sections = Vec::new();
    let mut reals = Vec::new();
    for p in poles {
        if p.im > tol {
            sections.push((-2.0 * p.re, p.norm_sqr()));
        } else if p.im.abs() <= tol {
            reals.push(p.re);
        }
    }
    reals.sort_by(|a, b| a.total_cmp(b));
    for pair in reals.chunks(2) {
        match pair {
            [p1, p2] => sections.push((-(p1 + p2), p1 * p2)),
            [p] => sections.push((-p, 0.0)),
            _ => unreachable!(),
        }
    }
    sections
}

/// Butterworth band-pass of the given prototype order. With `zero_phase` the
/// filter runs forward and backward, squaring the magnitude response.
pub fn bandpass(
    ts: &TimeSeries,
    f_lo: f64,
    f_hi: f64,
    order: usize,
    zero_phase: bool,
) -> Result<TimeSeries> {
    let filt = ButterworthBandpass::design(f_lo, f_hi, order, 1.0 / ts.dt())?;
    let out = if zero_phase {
        filt.filtfilt(ts.samples())
    } else {
        let mut y = ts.samples().to_vec();
        filt.filter(&mut y);
        y
    };
    ts.with_samples(out)
}
