//! Time-frequency envelope and phase misfits between two waveforms.
//!
//! Both traces go through a continuous wavelet transform with an analytic
//! Morlet wavelet. Envelope and phase differences of the coefficients are
//! normalised by the reference's global maximum, projected onto time and
//! frequency, and mapped to a 0–10 goodness-of-fit scale.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::anderson::QualityLevel;
use crate::error::{Error, Result};
use crate::imeasures::log_spaced;
use crate::signal::{taper, TimeSeries};

/// Continuous wavelet coefficients, one row per frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct TfPlane {
    times: Vec<f64>,
    freqs: Vec<f64>,
    rows: Vec<Vec<Complex64>>,
}

impl TfPlane {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    /// Coefficient at time index `i`, frequency index `j`.
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.rows[j][i]
    }

    pub fn row(&self, j: usize) -> &[Complex64] {
        &self.rows[j]
    }

    pub fn max_abs(&self) -> f64 {
        self.rows
            .iter()
            .flatten()
            .fold(0.0_f64, |m, w| m.max(w.norm()))
    }

    /// `|W|` as a real map.
    pub fn modulus(&self) -> TfMap {
        TfMap::from_fn(&self.times, &self.freqs, |i, j| self.at(i, j).norm())
    }
}

/// Real-valued map over a time-frequency grid, stored time-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfMap {
    pub times: Vec<f64>,
    pub freqs: Vec<f64>,
    pub values: Vec<f64>,
}

impl TfMap {
    fn from_fn<F: Fn(usize, usize) -> f64>(times: &[f64], freqs: &[f64], f: F) -> Self {
        let mut values = Vec::with_capacity(times.len() * freqs.len());
        for i in 0..times.len() {
            for j in 0..freqs.len() {
                values.push(f(i, j));
            }
        }
        Self {
            times: times.to_vec(),
            freqs: freqs.to_vec(),
            values,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.freqs.len() + j]
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            times: self.times.clone(),
            freqs: self.freqs.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Dense `t,f,value` table.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,f,value\n");
        for (i, t) in self.times.iter().enumerate() {
            for (j, f) in self.freqs.iter().enumerate() {
                out.push_str(&format!("{t},{f},{}\n", self.get(i, j)));
            }
        }
        out
    }
}

fn check_freqs(freqs: &[f64], nyquist: f64) -> Result<()> {
    if freqs.is_empty() {
        return Err(Error::InvalidParameter("empty frequency grid".into()));
    }
    if freqs.iter().any(|&f| !(f > 0.0 && f < nyquist)) {
        return Err(Error::InvalidParameter(format!(
            "wavelet frequencies must lie in (0, {nyquist}) Hz"
        )));
    }
    if freqs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "wavelet frequencies must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Analytic Morlet transform on the sample grid of `ts`.
///
/// Scale `s = ω0 / (2πf)`; the wavelet is normalised to unit L² energy at
/// every scale. The trace is zero-padded far enough that the longest wavelet
/// never wraps around.
pub fn cwt(ts: &TimeSeries, freqs: &[f64], omega0: f64) -> Result<TfPlane> {
    check_freqs(freqs, ts.nyquist())?;
    if !(omega0 > 0.0) {
        return Err(Error::InvalidParameter("omega0 must be > 0".into()));
    }
    let n = ts.len();
    let dt = ts.dt();
    let s_max = omega0 / (2.0 * PI * freqs[0]);
    let support = (6.0 * s_max / dt).ceil() as usize;
    let nfft = (n + support).next_power_of_two();

    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(nfft);
    let inv = planner.plan_fft_inverse(nfft);

    let mut spec: Vec<Complex64> = ts
        .samples()
        .iter()
        .map(|&x| Complex64::new(x, 0.0))
        .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
        .take(nfft)
        .collect();
    fwd.process(&mut spec);

    let dw = 2.0 * PI / (nfft as f64 * dt);
    let c0 = PI.powf(-0.25);
    let rows = freqs
        .par_iter()
        .map(|&f| {
            let s = omega0 / (2.0 * PI * f);
            let norm = c0 * (2.0 * PI * s / dt).sqrt() / nfft as f64;
            let mut buf: Vec<Complex64> = spec
                .iter()
                .enumerate()
                .map(|(k, &x)| {
                    // positive frequencies only: analytic wavelet
                    if k == 0 || k > nfft / 2 {
                        return Complex64::new(0.0, 0.0);
                    }
                    let arg = s * k as f64 * dw - omega0;
                    x * (norm * (-0.5 * arg * arg).exp())
                })
                .collect();
            inv.process(&mut buf);
            buf.truncate(n);
            buf
        })
        .collect();

    Ok(TfPlane {
        times: (0..n).map(|i| ts.time(i)).collect(),
        freqs: freqs.to_vec(),
        rows,
    })
}

/// Envelope and phase misfits, globally normalised by the reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfMisfits {
    pub tfem: TfMap,
    pub tfpm: TfMap,
    pub tem: Vec<f64>,
    pub tpm: Vec<f64>,
    pub fem: Vec<f64>,
    pub fpm: Vec<f64>,
    pub em: f64,
    pub pm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GofMapping {
    pub a: f64,
    pub k: f64,
}

impl Default for GofMapping {
    fn default() -> Self {
        Self { a: 10.0, k: 1.0 }
    }
}

impl GofMapping {
    /// `A·exp(−k·|M|)`.
    pub fn apply(&self, misfit: f64) -> f64 {
        self.a * (-self.k * misfit.abs()).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TfConfig {
    pub omega0: f64,
    pub f_min: f64,
    pub f_max: f64,
    pub n_freqs: usize,
    /// Taper fraction applied at each end before the transform.
    pub taper_fraction: f64,
    pub mapping: GofMapping,
}

impl Default for TfConfig {
    fn default() -> Self {
        Self {
            omega0: 6.0,
            f_min: 0.05,
            f_max: 10.0,
            n_freqs: 40,
            taper_fraction: 0.05,
            mapping: GofMapping::default(),
        }
    }
}

impl TfConfig {
    pub fn freqs(&self) -> Vec<f64> {
        log_spaced(self.f_min, self.f_max, self.n_freqs)
    }
}

/// Misfits of `sim` against `reference` on the given frequency grid.
pub fn tf_misfits(
    reference: &TimeSeries,
    sim: &TimeSeries,
    freqs: &[f64],
    cfg: &TfConfig,
) -> Result<TfMisfits> {
    reference.ensure_same_grid(sim)?;
    let wr = cwt(&taper(reference, cfg.taper_fraction)?, freqs, cfg.omega0)?;
    let ws = cwt(&taper(sim, cfg.taper_fraction)?, freqs, cfg.omega0)?;
    misfits_from_planes(&wr, &ws)
}

fn misfits_from_planes(wr: &TfPlane, ws: &TfPlane) -> Result<TfMisfits> {
    let (nt, nf) = (wr.times.len(), wr.freqs.len());
    let peak = wr.max_abs();
    if !(peak > 0.0) {
        return Err(Error::ZeroReference);
    }
    let ar = wr.modulus();
    // local envelope difference and phase difference in units of π
    let de = TfMap::from_fn(&wr.times, &wr.freqs, |i, j| ws.at(i, j).norm() - ar.get(i, j));
    let dp = TfMap::from_fn(&wr.times, &wr.freqs, |i, j| {
        (ws.at(i, j) * wr.at(i, j).conj()).arg() / PI
    });

    let tfem = de.map(|v| v / peak);
    let tfpm = TfMap::from_fn(&wr.times, &wr.freqs, |i, j| ar.get(i, j) * dp.get(i, j) / peak);

    let mut t_e = vec![0.0; nt];
    let mut t_p = vec![0.0; nt];
    let mut t_w = vec![0.0; nt];
    let mut f_e = vec![0.0; nf];
    let mut f_p = vec![0.0; nf];
    let mut f_w = vec![0.0; nf];
    let (mut se, mut sp, mut sw) = (0.0, 0.0, 0.0);
    for i in 0..nt {
        for j in 0..nf {
            let a = ar.get(i, j);
            let (e, p) = (de.get(i, j), dp.get(i, j));
            t_e[i] += a * e;
            t_p[i] += a * a * p;
            t_w[i] += a * a;
            f_e[j] += a * e;
            f_p[j] += a * a * p;
            f_w[j] += a * a;
            se += e * e;
            sp += (a * p).powi(2);
            sw += a * a;
        }
    }
    let t_max = t_w.iter().cloned().fold(0.0, f64::max);
    let f_max = f_w.iter().cloned().fold(0.0, f64::max);
    Ok(TfMisfits {
        tfem,
        tfpm,
        tem: t_e.iter().map(|v| v / t_max).collect(),
        tpm: t_p.iter().map(|v| v / t_max).collect(),
        fem: f_e.iter().map(|v| v / f_max).collect(),
        fpm: f_p.iter().map(|v| v / f_max).collect(),
        em: (se / sw).sqrt(),
        pm: (sp / sw).sqrt(),
    })
}

/// Goodness-of-fit counterparts of every misfit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfGof {
    pub eg: f64,
    pub pg: f64,
    pub teg: Vec<f64>,
    pub tpg: Vec<f64>,
    pub feg: Vec<f64>,
    pub fpg: Vec<f64>,
    pub tfeg: TfMap,
    pub tfpg: TfMap,
}

impl TfGof {
    pub fn summary(&self) -> TfSummary {
        TfSummary {
            eg: self.eg,
            pg: self.pg,
            eg_quality: QualityLevel::from_score(self.eg),
            pg_quality: QualityLevel::from_score(self.pg),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TfSummary {
    pub eg: f64,
    pub pg: f64,
    pub eg_quality: QualityLevel,
    pub pg_quality: QualityLevel,
}

pub fn to_gof(m: &TfMisfits, mapping: GofMapping) -> TfGof {
    let g = |v: &Vec<f64>| v.iter().map(|&x| mapping.apply(x)).collect();
    TfGof {
        eg: mapping.apply(m.em),
        pg: mapping.apply(m.pm),
        teg: g(&m.tem),
        tpg: g(&m.tpm),
        feg: g(&m.fem),
        fpg: g(&m.fpm),
        tfeg: m.tfem.map(|x| mapping.apply(x)),
        tfpg: m.tfpm.map(|x| mapping.apply(x)),
    }
}

/// Transform, misfits and GOF in one call, using the configured grid.
pub fn tf_gof(reference: &TimeSeries, sim: &TimeSeries, cfg: &TfConfig) -> Result<TfGof> {
    let m = tf_misfits(reference, sim, &cfg.freqs(), cfg)?;
    Ok(to_gof(&m, cfg.mapping))
}
