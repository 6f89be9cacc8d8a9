use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::trapezoid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StfShape {
    /// Piecewise-cosine moment-rate pulse with a short, sharp onset.
    #[default]
    Liu,
    Boxcar,
}

/// Sampled moment-rate function with unit area, supported on `[0, rise_time]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceTimeFunction {
    rise_time: f64,
    dt: f64,
    samples: Vec<f64>,
}

impl SourceTimeFunction {
    pub fn new(shape: StfShape, rise_time: f64, dt: f64) -> Result<Self> {
        if !(rise_time > 0.0 && rise_time.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "rise time must be > 0, got {rise_time}"
            )));
        }
        if !(dt > 0.0) || dt > rise_time / 20.0 {
            return Err(Error::InvalidParameter(format!(
                "dt = {dt} s is too coarse for rise time {rise_time} s (need dt <= rise_time / 20)"
            )));
        }
        let n = (rise_time / dt + 1e-9).floor() as usize;
        let mut samples: Vec<f64> = (0..=n)
            .map(|k| match shape {
                StfShape::Liu => liu_rate(k as f64 * dt, rise_time),
                StfShape::Boxcar => 1.0,
            })
            .collect();
        let area = trapezoid(&samples, dt);
        samples.iter_mut().for_each(|s| *s /= area);
        Ok(Self {
            rise_time,
            dt,
            samples,
        })
    }

    pub fn rise_time(&self) -> f64 {
        self.rise_time
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Time of the last sample (≤ rise time).
    pub fn support_end(&self) -> f64 {
        self.dt * (self.samples.len() - 1) as f64
    }

    pub fn peak_time(&self) -> f64 {
        let (k, _) = self
            .samples
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty");
        k as f64 * self.dt
    }
}

/// Unnormalised Liu et al. (2006) slip-rate shape; `tau1 = 0.13 τ`.
fn liu_rate(t: f64, tau: f64) -> f64 {
    use std::f64::consts::PI;
    let tau1 = 0.13 * tau;
    let tau2 = tau - tau1;
    let cn = PI / (1.4 * PI * tau1 + 1.2 * tau1 + 0.3 * PI * tau2);
    let v = if t < 0.0 || t > tau {
        0.0
    } else if t < tau1 {
        0.7 - 0.7 * (PI * t / tau1).cos() + 0.6 * (0.5 * PI * t / tau1).sin()
    } else if t < 2.0 * tau1 {
        1.0 - 0.7 * (PI * t / tau1).cos() + 0.3 * (PI * (t - tau1) / tau2).cos()
    } else {
        0.3 + 0.3 * (PI * (t - tau1) / tau2).cos()
    };
    cn * v
}

/// Liu-shaped moment-rate function with the given rise time.
pub fn liu_stf(rise_time: f64, dt: f64) -> Result<SourceTimeFunction> {
    SourceTimeFunction::new(StfShape::Liu, rise_time, dt)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_shape_has_unit_area() {
        // fine Simpson quadrature of the closed-form shape, independent of sampling
        let tau = 1.0;
        let n = 200_000;
        let h = tau / n as f64;
        let mut s = liu_rate(0.0, tau) + liu_rate(tau, tau);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            s += w * liu_rate(k as f64 * h, tau);
        }
        let area = s * h / 3.0;
        assert!((area - 1.0).abs() < 1e-6, "{area}");
    }

    #[test]
    fn sampled_stf_contract() {
        let stf = liu_stf(1.0, 1e-3).unwrap();
        let area = trapezoid(stf.samples(), stf.dt());
        assert!((area - 1.0).abs() < 1e-6);
        let peak = stf.samples().iter().cloned().fold(0.0, f64::max);
        assert!(stf.samples()[0].abs() < 1e-9 * peak);
        assert!(stf.samples().last().unwrap().abs() < 1e-9 * peak);
        assert!(stf.samples().iter().all(|&v| v >= 0.0));
        assert!(stf.support_end() <= 1.0 + 1e-12);
    }

    #[test]
    fn peak_in_first_half() {
        let stf = liu_stf(1.0, 1e-3).unwrap();
        // regression fixture: the shape peaks at t = 0.13 τ
        assert!((stf.peak_time() - 0.13).abs() < 1e-3 + 1e-12);
        assert!(stf.peak_time() < 0.5);
    }

    #[test]
    fn continuity_at_breakpoints() {
        let tau = 2.0;
        for t in [0.13 * tau, 0.26 * tau] {
            let l = liu_rate(t - 1e-9, tau);
            let r = liu_rate(t + 1e-9, tau);
            assert!((l - r).abs() < 1e-6, "t={t}: {l} vs {r}");
        }
    }

    #[test]
    fn coarse_dt_rejected() {
        assert!(liu_stf(1.0, 0.06).is_err());
        assert!(liu_stf(1.0, 0.05).is_ok());
        assert!(liu_stf(0.0, 0.001).is_err());
    }

    #[test]
    fn boxcar_alternative() {
        let stf = SourceTimeFunction::new(StfShape::Boxcar, 1.0, 0.01).unwrap();
        assert!((trapezoid(stf.samples(), 0.01) - 1.0).abs() < 1e-12);
        assert!((stf.samples()[10] - 1.0).abs() < 1e-12);
    }
}
