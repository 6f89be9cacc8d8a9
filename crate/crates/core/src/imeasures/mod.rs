//! Strong-motion intensity measures: peak values, Arias and energy integrals
//! with their significant durations, response spectra, Fourier spectra and
//! the lagged cross-correlation used for pair comparisons.

mod response;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{
    cumulative_trapezoid, detrend, fourier_amplitude, integrate, trapezoid, DetrendMode,
    Spectrum, TimeSeries, Unit,
};

pub use response::{
    default_periods, log_spaced, response_spectrum, sdof_peaks, ResponseSpectrum, SpectralKind,
};

/// Gravitational acceleration used in the Arias intensity, m/s².
pub const G: f64 = 9.81;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImConfig {
    pub damping: f64,
    pub periods: Vec<f64>,
    /// Lower and upper cumulative fractions bounding the Arias duration.
    pub arias_thresholds: (f64, f64),
    /// Same for the energy (∫v²) duration.
    pub energy_thresholds: (f64, f64),
    pub spectral_kind: SpectralKind,
    /// Log-frequency boxcar width for the Fourier spectrum; 0 disables.
    pub fs_smoothing_octaves: f64,
    /// Remove a least-squares line after each integration step.
    pub detrend_integrals: bool,
}

impl Default for ImConfig {
    fn default() -> Self {
        Self {
            damping: 0.05,
            periods: default_periods(),
            arias_thresholds: (0.05, 0.75),
            energy_thresholds: (0.05, 0.75),
            spectral_kind: SpectralKind::Pseudo,
            fs_smoothing_octaves: 0.0,
            detrend_integrals: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peaks {
    pub pga: f64,
    pub pgv: f64,
    pub pgd: f64,
}

/// Intensity measures of one acceleration trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntensityVector {
    pub pga: f64,
    pub pgv: f64,
    pub pgd: f64,
    pub ia: f64,
    pub da: f64,
    pub de: f64,
    pub iv: f64,
    pub sa: ResponseSpectrum,
    pub fs: Spectrum,
}

fn integrate_detrended(ts: &TimeSeries, detrend_after: bool) -> Result<TimeSeries> {
    let out = integrate(ts)?;
    if detrend_after {
        detrend(&out, DetrendMode::Linear)
    } else {
        Ok(out)
    }
}

/// Velocity obtained from acceleration by (optionally detrended) integration.
pub fn velocity_from_acceleration(acc: &TimeSeries, detrend_after: bool) -> Result<TimeSeries> {
    acc.ensure_unit(Unit::Acceleration)?;
    integrate_detrended(acc, detrend_after)
}

pub fn peaks(acc: &TimeSeries, detrend_integrals: bool) -> Result<Peaks> {
    let vel = velocity_from_acceleration(acc, detrend_integrals)?;
    let disp = integrate_detrended(&vel, detrend_integrals)?;
    Ok(Peaks {
        pga: acc.peak_abs(),
        pgv: vel.peak_abs(),
        pgd: disp.peak_abs(),
    })
}

/// `π/(2g) ∫ a² dt`, m/s.
pub fn arias_intensity(acc: &TimeSeries) -> Result<f64> {
    acc.ensure_unit(Unit::Acceleration)?;
    let sq: Vec<f64> = acc.samples().iter().map(|a| a * a).collect();
    Ok(std::f64::consts::PI / (2.0 * G) * trapezoid(&sq, acc.dt()))
}

/// Length of the window over which the cumulative integral of `x²` grows
/// from `lo` to `hi` of its total.
///
/// The start is the last time the curve is still at or below `lo·total` and
/// the end the first time it reaches `hi·total`, both linearly interpolated,
/// so `lo = 0, hi = 1` spans exactly the support of the energy.
pub fn significant_duration(ts: &TimeSeries, lo: f64, hi: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo >= hi {
        return Err(Error::InvalidParameter(format!(
            "duration thresholds must satisfy 0 <= lo < hi <= 1, got ({lo}, {hi})"
        )));
    }
    let sq: Vec<f64> = ts.samples().iter().map(|a| a * a).collect();
    let cum = cumulative_trapezoid(&sq, ts.dt());
    let total = *cum.last().expect("non-empty");
    if !(total > 0.0) {
        return Err(Error::ZeroEnergy);
    }
    let dt = ts.dt();
    let (lo_level, hi_level) = (lo * total, hi * total);

    // last index with cum <= lo_level; cum is non-decreasing
    let i = cum.partition_point(|&c| c <= lo_level) - 1;
    let t_start = if i + 1 < cum.len() && cum[i + 1] > cum[i] {
        i as f64 * dt + dt * (lo_level - cum[i]) / (cum[i + 1] - cum[i])
    } else {
        i as f64 * dt
    };
    // first index with cum >= hi_level
    let j = cum.partition_point(|&c| c < hi_level);
    let t_end = if j > 0 && cum[j] > cum[j - 1] {
        (j - 1) as f64 * dt + dt * (hi_level - cum[j - 1]) / (cum[j] - cum[j - 1])
    } else {
        j as f64 * dt
    };
    Ok((t_end - t_start).max(0.0))
}

pub fn arias_duration(acc: &TimeSeries, lo: f64, hi: f64) -> Result<f64> {
    acc.ensure_unit(Unit::Acceleration)?;
    significant_duration(acc, lo, hi)
}

/// `∫ v² dt`, m²/s.
pub fn energy_integral(vel: &TimeSeries) -> Result<f64> {
    vel.ensure_unit(Unit::Velocity)?;
    let sq: Vec<f64> = vel.samples().iter().map(|v| v * v).collect();
    Ok(trapezoid(&sq, vel.dt()))
}

pub fn energy_duration(vel: &TimeSeries, lo: f64, hi: f64) -> Result<f64> {
    vel.ensure_unit(Unit::Velocity)?;
    significant_duration(vel, lo, hi)
}

/// Maximum over lags `|τ| <= max_lag` of the normalised cross-correlation of
/// the demeaned traces.
pub fn cross_correlation(a: &TimeSeries, b: &TimeSeries, max_lag: f64) -> Result<f64> {
    a.ensure_same_grid(b)?;
    if !(max_lag >= 0.0) {
        return Err(Error::InvalidParameter("max_lag must be >= 0".into()));
    }
    let x = detrend(a, DetrendMode::Mean)?.into_samples();
    let y = detrend(b, DetrendMode::Mean)?.into_samples();
    let ex: f64 = x.iter().map(|v| v * v).sum();
    let ey: f64 = y.iter().map(|v| v * v).sum();
    if !(ex > 0.0 && ey > 0.0) {
        return Err(Error::ZeroVariance);
    }
    // sqrt of the product is exact for identical inputs; fall back on overflow
    let norm = match (ex * ey).sqrt() {
        v if v.is_finite() && v > 0.0 => v,
        _ => ex.sqrt() * ey.sqrt(),
    };
    let n = x.len() as i64;
    let k = ((max_lag / a.dt() + 1e-9).floor() as i64).min(n - 1);
    let mut best = f64::NEG_INFINITY;
    for lag in -k..=k {
        let (xs, ys) = if lag >= 0 {
            (&x[..(n - lag) as usize], &y[lag as usize..])
        } else {
            (&x[(-lag) as usize..], &y[..(n + lag) as usize])
        };
        let s: f64 = xs.iter().zip(ys).map(|(p, q)| p * q).sum();
        best = best.max(s / norm);
    }
    Ok(best.clamp(-1.0, 1.0))
}

/// Computes every single-trace measure. A zero-energy trace reports zero
/// durations rather than failing.
pub fn intensity_vector(acc: &TimeSeries, cfg: &ImConfig) -> Result<IntensityVector> {
    acc.ensure_unit(Unit::Acceleration)?;
    let vel = velocity_from_acceleration(acc, cfg.detrend_integrals)?;
    let disp = integrate_detrended(&vel, cfg.detrend_integrals)?;
    let zero_ok = |r: Result<f64>| match r {
        Err(Error::ZeroEnergy) => Ok(0.0),
        other => other,
    };
    let (alo, ahi) = cfg.arias_thresholds;
    let (elo, ehi) = cfg.energy_thresholds;
    Ok(IntensityVector {
        pga: acc.peak_abs(),
        pgv: vel.peak_abs(),
        pgd: disp.peak_abs(),
        ia: arias_intensity(acc)?,
        da: zero_ok(arias_duration(acc, alo, ahi))?,
        de: zero_ok(energy_duration(&vel, elo, ehi))?,
        iv: energy_integral(&vel)?,
        sa: response_spectrum(acc, cfg.damping, &cfg.periods, cfg.spectral_kind)?,
        fs: fourier_amplitude(acc, cfg.fs_smoothing_octaves)?,
    })
}
