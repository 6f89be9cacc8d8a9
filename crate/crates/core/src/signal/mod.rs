//! Uniformly sampled waveforms and the processing primitives shared by the
//! rest of the crate.
//!
//! Every operation here is a pure function returning a new [`TimeSeries`].
//! Units travel with the samples; integration and differentiation promote or
//! demote them, and operations that combine two series refuse to mix units.

mod filter;
mod spectrum;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use filter::{bandpass, ButterworthBandpass, Biquad};
pub use spectrum::{fourier_amplitude, Smoothing, Spectrum};

/// Physical quantity carried by a [`TimeSeries`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Unit {
    #[serde(rename = "m/s^2")]
    Acceleration,
    #[serde(rename = "m/s")]
    Velocity,
    #[serde(rename = "m")]
    Displacement,
}

impl Unit {
    /// Unit obtained after one time integration.
    pub fn integrated(self) -> Option<Unit> {
        match self {
            Unit::Acceleration => Some(Unit::Velocity),
            Unit::Velocity => Some(Unit::Displacement),
            Unit::Displacement => None,
        }
    }

    /// Unit obtained after one time derivative.
    pub fn differentiated(self) -> Option<Unit> {
        match self {
            Unit::Displacement => Some(Unit::Velocity),
            Unit::Velocity => Some(Unit::Acceleration),
            Unit::Acceleration => None,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Unit::Acceleration => "m/s^2",
            Unit::Velocity => "m/s",
            Unit::Displacement => "m",
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// A uniformly sampled, single-component waveform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    dt: f64,
    t0: f64,
    samples: Vec<f64>,
    unit: Unit,
    label: String,
}

impl TimeSeries {
    pub fn new(
        dt: f64,
        t0: f64,
        samples: Vec<f64>,
        unit: Unit,
        label: impl Into<String>,
    ) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidSeries(format!("dt must be > 0, got {dt}")));
        }
        if !t0.is_finite() {
            return Err(Error::InvalidSeries("t0 must be finite".into()));
        }
        if samples.len() < 2 {
            return Err(Error::InvalidSeries(format!(
                "need at least 2 samples, got {}",
                samples.len()
            )));
        }
        if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidSeries(format!("non-finite sample at index {i}")));
        }
        Ok(Self {
            dt,
            t0,
            samples,
            unit,
            label: label.into(),
        })
    }

    /// Same grid, unit and label with new sample values.
    pub fn with_samples(&self, samples: Vec<f64>) -> Result<Self> {
        TimeSeries::new(self.dt, self.t0, samples, self.unit, self.label.clone())
    }

    fn derived(&self, samples: Vec<f64>, unit: Unit) -> Result<Self> {
        TimeSeries::new(self.dt, self.t0, samples, unit, self.label.clone())
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn set_label(&mut self, label: impl Into<String>) {
        self.label = label.into();
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Time of the last sample.
    pub fn t_end(&self) -> f64 {
        self.t0 + self.dt * (self.samples.len() - 1) as f64
    }

    pub fn duration(&self) -> f64 {
        self.dt * (self.samples.len() - 1) as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + self.dt * i as f64
    }

    pub fn nyquist(&self) -> f64 {
        0.5 / self.dt
    }

    pub fn peak_abs(&self) -> f64 {
        self.samples.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn rms(&self) -> f64 {
        (self.samples.iter().map(|x| x * x).sum::<f64>() / self.samples.len() as f64).sqrt()
    }

    /// Multiplies every sample by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        self.with_samples(self.samples.iter().map(|x| x * factor).collect())
    }

    /// Linear interpolation at time `t`; zero outside the record.
    pub fn value_at(&self, t: f64) -> f64 {
        let last = (self.samples.len() - 1) as f64;
        let mut x = (t - self.t0) / self.dt;
        // grid times reconstructed as t0 + i·dt can miss the ends by an ulp
        if x < 0.0 && x > -1e-9 {
            x = 0.0;
        } else if x > last && x < last + 1e-9 {
            x = last;
        }
        if x < 0.0 || x > last {
            return 0.0;
        }
        let i = x.floor() as usize;
        if i + 1 >= self.samples.len() {
            return self.samples[self.samples.len() - 1];
        }
        let w = x - i as f64;
        self.samples[i] * (1.0 - w) + self.samples[i + 1] * w
    }

    pub(crate) fn ensure_unit(&self, expected: Unit) -> Result<()> {
        if self.unit != expected {
            return Err(Error::UnitMismatch {
                expected,
                found: self.unit,
            });
        }
        Ok(())
    }

    pub(crate) fn ensure_same_grid(&self, other: &TimeSeries) -> Result<()> {
        if self.unit != other.unit {
            return Err(Error::UnitMismatch {
                expected: self.unit,
                found: other.unit,
            });
        }
        if self.len() != other.len() || (self.dt - other.dt).abs() > 1e-12 * self.dt {
            return Err(Error::InvalidSeries(
                "series are not on a common grid; align them first".into(),
            ));
        }
        Ok(())
    }
}

/// Three-component record at one station.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record3C {
    pub ew: TimeSeries,
    pub ns: TimeSeries,
    pub ud: TimeSeries,
    pub station_id: String,
    pub epicentral_distance: Option<f64>,
}

/// Ground-motion component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    Ew,
    Ns,
    Ud,
}

impl Component {
    pub const ALL: [Component; 3] = [Component::Ew, Component::Ns, Component::Ud];

    pub fn name(self) -> &'static str {
        match self {
            Component::Ew => "ew",
            Component::Ns => "ns",
            Component::Ud => "ud",
        }
    }

    pub fn parse(s: &str) -> Option<Component> {
        match s.to_ascii_lowercase().as_str() {
            "ew" => Some(Component::Ew),
            "ns" => Some(Component::Ns),
            "ud" => Some(Component::Ud),
            _ => None,
        }
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Record3C {
    pub fn new(
        ew: TimeSeries,
        ns: TimeSeries,
        ud: TimeSeries,
        station_id: impl Into<String>,
        epicentral_distance: Option<f64>,
    ) -> Result<Self> {
        for c in [&ns, &ud] {
            if c.len() != ew.len() || c.dt != ew.dt || c.t0 != ew.t0 {
                return Err(Error::InvalidSeries(
                    "components must share dt, t0 and length".into(),
                ));
            }
            if c.unit != ew.unit {
                return Err(Error::UnitMismatch {
                    expected: ew.unit,
                    found: c.unit,
                });
            }
        }
        Ok(Self {
            ew,
            ns,
            ud,
            station_id: station_id.into(),
            epicentral_distance,
        })
    }

    pub fn component(&self, c: Component) -> &TimeSeries {
        match c {
            Component::Ew => &self.ew,
            Component::Ns => &self.ns,
            Component::Ud => &self.ud,
        }
    }

    pub fn unit(&self) -> Unit {
        self.ew.unit
    }

    pub fn dt(&self) -> f64 {
        self.ew.dt
    }

    pub fn len(&self) -> usize {
        self.ew.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ew.is_empty()
    }

    pub fn map<F>(&self, mut f: F) -> Result<Record3C>
    where
        F: FnMut(&TimeSeries) -> Result<TimeSeries>,
    {
        Record3C::new(
            f(&self.ew)?,
            f(&self.ns)?,
            f(&self.ud)?,
            self.station_id.clone(),
            self.epicentral_distance,
        )
    }
}

/// One value per ground-motion component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ByComponent<T> {
    pub ew: T,
    pub ns: T,
    pub ud: T,
}

impl<T> ByComponent<T> {
    pub fn get(&self, c: Component) -> &T {
        match c {
            Component::Ew => &self.ew,
            Component::Ns => &self.ns,
            Component::Ud => &self.ud,
        }
    }

    pub fn try_build<F>(mut f: F) -> Result<Self>
    where
        F: FnMut(Component) -> Result<T>,
    {
        Ok(Self {
            ew: f(Component::Ew)?,
            ns: f(Component::Ns)?,
            ud: f(Component::Ud)?,
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = (Component, &T)> {
        [
            (Component::Ew, &self.ew),
            (Component::Ns, &self.ns),
            (Component::Ud, &self.ud),
        ]
        .into_iter()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetrendMode {
    Mean,
    Linear,
}

/// Removes the mean or the least-squares line.
pub fn detrend(ts: &TimeSeries, mode: DetrendMode) -> Result<TimeSeries> {
    let n = ts.len() as f64;
    let x = ts.samples();
    let out = match mode {
        DetrendMode::Mean => {
            let mean = x.iter().sum::<f64>() / n;
            // second pass picks up the rounding residue of the first
            let mut y: Vec<f64> = x.iter().map(|v| v - mean).collect();
            let resid = y.iter().sum::<f64>() / n;
            y.iter_mut().for_each(|v| *v -= resid);
            y
        }
        DetrendMode::Linear => {
            // abscissa centred on the middle sample keeps the normal equations diagonal
            let mid = (n - 1.0) / 2.0;
            let sxx: f64 = (0..x.len()).map(|i| (i as f64 - mid).powi(2)).sum();
            let mean = x.iter().sum::<f64>() / n;
            let sxy: f64 = x
                .iter()
                .enumerate()
                .map(|(i, v)| (i as f64 - mid) * (v - mean))
                .sum();
            let slope = sxy / sxx;
            x.iter()
                .enumerate()
                .map(|(i, v)| v - mean - slope * (i as f64 - mid))
                .collect()
        }
    };
    ts.with_samples(out)
}

/// Cosine (Tukey) taper; `fraction` of the record is tapered at each end.
pub fn taper(ts: &TimeSeries, fraction: f64) -> Result<TimeSeries> {
    if !(0.0..=0.5).contains(&fraction) {
        return Err(Error::InvalidParameter(format!(
            "taper fraction must lie in [0, 0.5], got {fraction}"
        )));
    }
    if fraction == 0.0 {
        return Ok(ts.clone());
    }
    let n = ts.len();
    let last = (n - 1) as f64;
    let width = fraction * last;
    let out = ts
        .samples()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let d = (i as f64).min(last - i as f64);
            if d < width {
                v * 0.5 * (1.0 - (std::f64::consts::PI * d / width).cos())
            } else {
                *v
            }
        })
        .collect();
    ts.with_samples(out)
}

/// Central differences with second-order one-sided stencils at both ends.
pub fn differentiate(ts: &TimeSeries) -> Result<TimeSeries> {
    let unit = ts.unit().differentiated().ok_or_else(|| {
        Error::InvalidParameter("cannot differentiate an acceleration series".into())
    })?;
    let x = ts.samples();
    let n = x.len();
    let dt = ts.dt();
    let mut y = vec![0.0; n];
    if n == 2 {
        let d = (x[1] - x[0]) / dt;
        y[0] = d;
        y[1] = d;
    } else {
        y[0] = (-3.0 * x[0] + 4.0 * x[1] - x[2]) / (2.0 * dt);
        for i in 1..n - 1 {
            y[i] = (x[i + 1] - x[i - 1]) / (2.0 * dt);
        }
        y[n - 1] = (3.0 * x[n - 1] - 4.0 * x[n - 2] + x[n - 3]) / (2.0 * dt);
    }
    ts.derived(y, unit)
}

/// Cumulative trapezoidal integral starting at zero.
pub fn integrate(ts: &TimeSeries) -> Result<TimeSeries> {
    let unit = ts.unit().integrated().ok_or_else(|| {
        Error::InvalidParameter("cannot integrate a displacement series".into())
    })?;
    ts.derived(cumulative_trapezoid(ts.samples(), ts.dt()), unit)
}

pub(crate) fn cumulative_trapezoid(x: &[f64], dt: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in x.windows(2) {
        acc += 0.5 * (w[0] + w[1]) * dt;
        out.push(acc);
    }
    out
}

pub(crate) fn trapezoid(x: &[f64], dt: f64) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let inner: f64 = x[1..x.len() - 1].iter().sum();
    dt * (inner + 0.5 * (x[0] + x[x.len() - 1]))
}

/// Resamples both series onto the finer of the two sampling intervals over
/// their common time window.
pub fn align(a: &TimeSeries, b: &TimeSeries) -> Result<(TimeSeries, TimeSeries)> {
    if a.unit() != b.unit() {
        return Err(Error::UnitMismatch {
            expected: a.unit(),
            found: b.unit(),
        });
    }
    let start = a.t0().max(b.t0());
    let end = a.t_end().min(b.t_end());
    let dt = a.dt().min(b.dt());
    if end - start < dt * (1.0 - 1e-9) {
        return Err(Error::NoOverlap);
    }
    let n = ((end - start) / dt + 1e-9).floor() as usize + 1;

    let resample = |ts: &TimeSeries| -> Result<TimeSeries> {
        let same_grid = (ts.dt() - dt).abs() <= 1e-12 * dt
            && ((start - ts.t0()) / dt - ((start - ts.t0()) / dt).round()).abs() < 1e-9;
        let samples = if same_grid {
            let offset = ((start - ts.t0()) / dt).round() as usize;
            ts.samples()[offset..offset + n].to_vec()
        } else {
            (0..n).map(|i| ts.value_at(start + dt * i as f64)).collect()
        };
        TimeSeries::new(dt, start, samples, ts.unit(), ts.label())
    };
    Ok((resample(a)?, resample(b)?))
}

/// Aligns each component pair of two records.
pub fn align_records(a: &Record3C, b: &Record3C) -> Result<(Record3C, Record3C)> {
    let (aew, bew) = align(&a.ew, &b.ew)?;
    let (ans, bns) = align(&a.ns, &b.ns)?;
    let (aud, bud) = align(&a.ud, &b.ud)?;
    Ok((
        Record3C::new(aew, ans, aud, a.station_id.clone(), a.epicentral_distance)?,
        Record3C::new(bew, bns, bud, b.station_id.clone(), b.epicentral_distance)?,
    ))
}
