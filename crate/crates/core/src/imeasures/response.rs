//! Elastic response spectra of damped single-degree-of-freedom oscillators.
//!
//! The oscillator `ü + 2ζωu̇ + ω²u = −a_g(t)` is stepped with the exact
//! solution for piecewise-linear excitation, so the only discretisation error
//! comes from the linear interpolation of the ground acceleration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{TimeSeries, Unit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectralKind {
    /// ω² · max|u|
    #[default]
    Pseudo,
    /// max|ü + a_g|
    Absolute,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseSpectrum {
    pub periods: Vec<f64>,
    pub values: Vec<f64>,
    pub damping: f64,
    pub kind: SpectralKind,
}

/// `n` log-spaced periods from `t_min` to `t_max` inclusive.
pub fn log_spaced(t_min: f64, t_max: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![t_min];
    }
    let (a, b) = (t_min.ln(), t_max.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// 50 periods between 0.05 s and 20 s, matching the 0.05–10 Hz band span.
pub fn default_periods() -> Vec<f64> {
    log_spaced(0.05, 20.0, 50)
}

/// Recurrence coefficients for one oscillator and time step.
struct Stepper {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    ap: f64,
    bp: f64,
    cp: f64,
    dp: f64,
}

impl Stepper {
    fn new(omega: f64, zeta: f64, dt: f64) -> Self {
        let k = omega * omega;
        let sq = (1.0 - zeta * zeta).sqrt();
        let wd = omega * sq;
        let e = (-zeta * omega * dt).exp();
        let (s, c) = (wd * dt).sin_cos();
        let zs = zeta / sq;
        let wdt = omega * dt;
        Self {
            a: e * (zs * s + c),
            b: e * s / wd,
            c: (2.0 * zeta / wdt
                + e * (((1.0 - 2.0 * zeta * zeta) / (wd * dt) - zs) * s
                    - (1.0 + 2.0 * zeta / wdt) * c))
                / k,
            d: (1.0 - 2.0 * zeta / wdt
                + e * ((2.0 * zeta * zeta - 1.0) / (wd * dt) * s + 2.0 * zeta / wdt * c))
                / k,
            ap: -e * omega / sq * s,
            bp: e * (c - zs * s),
            cp: (-1.0 / dt + e * ((omega / sq + zeta / (dt * sq)) * s + c / dt)) / k,
            dp: (1.0 - e * (zs * s + c)) / (k * dt),
        }
    }
}

/// Peak relative displacement and peak absolute acceleration of one
/// oscillator driven by `ground` (m/s²) sampled at `dt`.
pub fn sdof_peaks(ground: &[f64], dt: f64, period: f64, damping: f64) -> (f64, f64) {
    let omega = 2.0 * std::f64::consts::PI / period;
    let st = Stepper::new(omega, damping, dt);
    let (mut u, mut v) = (0.0_f64, 0.0_f64);
    let (mut umax, mut amax) = (0.0_f64, 0.0_f64);
    for w in ground.windows(2) {
        let (p0, p1) = (-w[0], -w[1]);
        let un = st.a * u + st.b * v + st.c * p0 + st.d * p1;
        let vn = st.ap * u + st.bp * v + st.cp * p0 + st.dp * p1;
        u = un;
        v = vn;
        umax = umax.max(u.abs());
        // absolute acceleration = ü + a_g = −2ζωu̇ − ω²u
        amax = amax.max((2.0 * damping * omega * v + omega * omega * u).abs());
    }
    (umax, amax)
}

/// Response spectrum over `periods`; periods not exceeding `2·dt` are skipped.
pub fn response_spectrum(
    acc: &TimeSeries,
    damping: f64,
    periods: &[f64],
    kind: SpectralKind,
) -> Result<ResponseSpectrum> {
    acc.ensure_unit(Unit::Acceleration)?;
    if !(0.0..1.0).contains(&damping) {
        return Err(Error::InvalidParameter(format!(
            "damping ratio must lie in [0, 1), got {damping}"
        )));
    }
    let dt = acc.dt();
    let mut kept = Vec::with_capacity(periods.len());
    let mut values = Vec::with_capacity(periods.len());
    for &p in periods {
        if !(p > 2.0 * dt) {
            log::warn!("skipping period {p} s: not above 2·dt = {} s", 2.0 * dt);
            continue;
        }
        let (umax, amax) = sdof_peaks(acc.samples(), dt, p, damping);
        let omega = 2.0 * std::f64::consts::PI / p;
        kept.push(p);
        values.push(match kind {
            SpectralKind::Pseudo => omega * omega * umax,
            SpectralKind::Absolute => amax,
        });
    }
    Ok(ResponseSpectrum {
        periods: kept,
        values,
        damping,
        kind,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn acc(samples: Vec<f64>, dt: f64) -> TimeSeries {
        TimeSeries::new(dt, 0.0, samples, Unit::Acceleration, "a").unwrap()
    }

    #[test]
    fn resonant_amplification() {
        let dt = 0.005;
        let period = 1.0;
        let n = (60.0 / dt) as usize;
        let x: Vec<f64> = (0..n).map(|i| (2.0 * PI * i as f64 * dt / period).sin()).collect();
        let rs = response_spectrum(&acc(x, dt), 0.05, &[period], SpectralKind::Pseudo).unwrap();
        let amp = rs.values[0];
        assert!((amp - 10.0).abs() < 0.02 * 10.0, "amplification {amp}");
    }

    #[test]
    fn rigid_limit_tracks_pga() {
        let dt = 0.005;
        let n = 4000;
        let x: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 * dt - 10.0;
                (-(t / 1.5).powi(2)).exp() * (2.0 * PI * 0.8 * t).sin()
            })
            .collect();
        let ts = acc(x, dt);
        let rs = response_spectrum(&ts, 0.05, &[0.02], SpectralKind::Pseudo).unwrap();
        let pga = ts.peak_abs();
        assert!((rs.values[0] - pga).abs() < 0.03 * pga);
    }

    #[test]
    fn static_step_settles_to_equilibrium() {
        // constant base acceleration g0 → u → −g0/ω²
        let dt = 0.01;
        let g0 = 2.0;
        let period = 0.5;
        let omega = 2.0 * PI / period;
        let st = Stepper::new(omega, 0.2, dt);
        let (mut u, mut v) = (0.0, 0.0);
        for _ in 0..5000 {
            let un = st.a * u + st.b * v + st.c * -g0 + st.d * -g0;
            let vn = st.ap * u + st.bp * v + st.cp * -g0 + st.dp * -g0;
            u = un;
            v = vn;
        }
        assert!((u + g0 / (omega * omega)).abs() < 1e-9);
        assert!(v.abs() < 1e-9);
    }

    #[test]
    fn free_vibration_matches_closed_form() {
        // zero excitation from u0: u(t) = e^{-ζωt}(u0 cos ω_d t + ζω u0 / ω_d sin ω_d t)
        let (omega, zeta, dt) = (3.0, 0.1, 0.01);
        let st = Stepper::new(omega, zeta, dt);
        let wd = omega * (1.0 - zeta * zeta).sqrt();
        let (mut u, mut v) = (1.0, 0.0);
        for k in 1..=300 {
            let un = st.a * u + st.b * v;
            v = st.ap * u + st.bp * v;
            u = un;
            let t = k as f64 * dt;
            let want = (-zeta * omega * t).exp() * ((wd * t).cos() + zeta * omega / wd * (wd * t).sin());
            assert!((u - want).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn zero_input_and_short_periods() {
        let ts = acc(vec![0.0; 500], 0.01);
        let rs = response_spectrum(&ts, 0.05, &[0.01, 0.02, 0.1, 1.0], SpectralKind::Pseudo).unwrap();
        assert_eq!(rs.periods, vec![0.1, 1.0]);
        assert!(rs.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn absolute_and_pseudo_close_for_light_damping() {
        let dt = 0.005;
        let x: Vec<f64> = (0..4000).map(|i| ((i as f64 * dt) * 7.0).sin() * (i as f64 * dt * 0.3).cos()).collect();
        let ts = acc(x, dt);
        let p = response_spectrum(&ts, 0.02, &[0.3], SpectralKind::Pseudo).unwrap();
        let a = response_spectrum(&ts, 0.02, &[0.3], SpectralKind::Absolute).unwrap();
        assert!((p.values[0] - a.values[0]).abs() < 0.05 * a.values[0]);
    }

    #[test]
    fn period_grid() {
        let p = default_periods();
        assert_eq!(p.len(), 50);
        assert!((p[0] - 0.05).abs() < 1e-15);
        assert!((p[49] - 20.0).abs() < 1e-12);
        assert!(p.windows(2).all(|w| w[1] > w[0]));
    }
}
