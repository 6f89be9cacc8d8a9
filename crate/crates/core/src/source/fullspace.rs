//! Complete displacement field of a moment-tensor point source in a
//! homogeneous, isotropic, unbounded elastic medium (near-field,
//! intermediate-field and far-field P and S terms).
//!
//! With `γ` the unit vector from source to receiver, `A = γ·M·γ`,
//! `T = tr M` and `m(t)` the normalised moment function (0 → 1), the
//! displacement is
//!
//! ```text
//! 4πρ u_n = (15γ_n A − 3γ_n T − 6(Mγ)_n) / r⁴ · ∫_{r/α}^{r/β} τ m(t − τ) dτ
//!         + (6γ_n A − γ_n T − 2(Mγ)_n) / (α² r²) · m(t − r/α)
//!         − (6γ_n A − γ_n T − 3(Mγ)_n) / (β² r²) · m(t − r/β)
//!         + γ_n A / (α³ r) · ṁ(t − r/α)
//!         − (γ_n A − (Mγ)_n) / (β³ r) · ṁ(t − r/β)
//! ```
//!
//! Acceleration is obtained from the sampled displacement with the
//! three-point second difference.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{moment_tensor, FocalMechanism, SourceTimeFunction, StfShape};
use crate::earthmodel::{CrustalLayer, CrustalModel};
use crate::error::{Error, Result};
use crate::signal::{Record3C, TimeSeries, Unit};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Medium {
    pub rho: f64,
    pub vp: f64,
    pub vs: f64,
}

impl From<&CrustalLayer> for Medium {
    fn from(l: &CrustalLayer) -> Self {
        Self {
            rho: l.rho,
            vp: l.vp,
            vs: l.vs,
        }
    }
}

impl Default for Medium {
    fn default() -> Self {
        let model = CrustalModel::default();
        Medium::from(model.layer_at(0.0).expect("default model covers depth 0"))
    }
}

/// Position in metres; `z` is depth (positive down).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSourceScenario {
    pub station_id: String,
    pub hypocenter: Position,
    pub receiver: Position,
    pub medium: Medium,
    /// Seismic moment, N·m.
    pub m0: f64,
    pub duration: f64,
    pub dt: f64,
}

impl Default for PointSourceScenario {
    /// 15 km hypocentral distance, source 1 km deep, station due north.
    fn default() -> Self {
        let depth = 1_000.0;
        let horizontal = (15_000.0_f64.powi(2) - depth * depth).sqrt();
        Self {
            station_id: "SYN".into(),
            hypocenter: Position {
                x: 0.0,
                y: 0.0,
                z: depth,
            },
            receiver: Position {
                x: horizontal,
                y: 0.0,
                z: 0.0,
            },
            medium: Medium::default(),
            m0: 2.81e16,
            duration: 12.0,
            dt: 0.005,
        }
    }
}

impl PointSourceScenario {
    pub fn hypocentral_distance(&self) -> f64 {
        let d = self.offset();
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    }

    pub fn epicentral_distance(&self) -> f64 {
        let d = self.offset();
        (d[0] * d[0] + d[1] * d[1]).sqrt()
    }

    fn offset(&self) -> [f64; 3] {
        [
            self.receiver.x - self.hypocenter.x,
            self.receiver.y - self.hypocenter.y,
            self.receiver.z - self.hypocenter.z,
        ]
    }

    pub fn p_arrival(&self) -> f64 {
        self.hypocentral_distance() / self.medium.vp
    }

    pub fn s_arrival(&self) -> f64 {
        self.hypocentral_distance() / self.medium.vs
    }

    pub fn n_samples(&self) -> usize {
        (self.duration / self.dt).round() as usize + 1
    }

    pub fn validate(&self, rise_time: f64) -> Result<()> {
        let m = &self.medium;
        if !(m.vp > m.vs && m.vs > 0.0 && m.rho > 0.0) {
            return Err(Error::InvalidParameter(
                "medium needs vp > vs > 0 and rho > 0".into(),
            ));
        }
        if !(self.hypocenter.z > 0.0) {
            return Err(Error::Geometry("hypocenter depth must be > 0".into()));
        }
        if self.receiver.z < 0.0 {
            return Err(Error::Geometry("receiver cannot lie above the surface".into()));
        }
        if !(self.m0 > 0.0 && self.m0.is_finite()) {
            return Err(Error::InvalidParameter("m0 must be > 0".into()));
        }
        if !(self.dt > 0.0 && self.duration > self.dt) {
            return Err(Error::InvalidParameter(
                "need dt > 0 and duration > dt".into(),
            ));
        }
        let r = self.hypocentral_distance();
        if r <= 1e-9 * self.hypocenter.z.max(1.0) {
            return Err(Error::Geometry(
                "receiver coincides with the hypocenter".into(),
            ));
        }
        let needed = self.s_arrival() + 2.0 * rise_time;
        if self.duration < needed {
            return Err(Error::InvalidParameter(format!(
                "duration {} s does not cover the S arrival plus two rise times ({needed:.3} s)",
                self.duration
            )));
        }
        Ok(())
    }
}

/// On-disk scenario description: geometry, medium, source and sampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    #[serde(flatten)]
    pub scenario: PointSourceScenario,
    pub mechanism: FocalMechanism,
    #[serde(default)]
    pub stf: StfShape,
    pub rise_time: f64,
}

impl Default for ScenarioFile {
    fn default() -> Self {
        Self {
            scenario: PointSourceScenario::default(),
            mechanism: FocalMechanism::new(45.0, 55.0, 90.0).expect("valid"),
            stf: StfShape::Liu,
            rise_time: 1.0,
        }
    }
}

impl ScenarioFile {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))
    }

    pub fn source_time_function(&self) -> Result<SourceTimeFunction> {
        SourceTimeFunction::new(self.stf, self.rise_time, self.scenario.dt)
    }
}

/// Individual contributions to the displacement field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Term {
    Near,
    IntermediateP,
    IntermediateS,
    FarP,
    FarS,
}

impl Term {
    pub const ALL: [Term; 5] = [
        Term::Near,
        Term::IntermediateP,
        Term::IntermediateS,
        Term::FarP,
        Term::FarS,
    ];

    fn index(self) -> usize {
        self as usize
    }
}

/// Per-term displacement in geographic `(x, y, z)` components.
#[derive(Debug, Clone)]
pub struct FieldTerms {
    dt: f64,
    terms: [[Vec<f64>; 3]; 5],
    station_id: String,
    epicentral_distance: f64,
}

impl FieldTerms {
    pub fn displacement(&self, term: Term) -> &[Vec<f64>; 3] {
        &self.terms[term.index()]
    }

    /// Acceleration record from the sum of the selected terms.
    pub fn acceleration(&self, parts: &[Term]) -> Result<Record3C> {
        let n = self.terms[0][0].len();
        let mut u = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for t in parts {
            for (c, comp) in u.iter_mut().enumerate() {
                for (acc, v) in comp.iter_mut().zip(&self.terms[t.index()][c]) {
                    *acc += v;
                }
            }
        }
        let [ux, uy, uz] = u;
        let mk = |u: &[f64], sign: f64, label: &str| {
            let a = second_difference(u, self.dt).into_iter().map(|v| sign * v).collect();
            TimeSeries::new(self.dt, 0.0, a, Unit::Acceleration, label)
        };
        Record3C::new(
            mk(&uy, 1.0, "EW")?,
            mk(&ux, 1.0, "NS")?,
            mk(&uz, -1.0, "UD")?,
            self.station_id.clone(),
            Some(self.epicentral_distance),
        )
    }
}

fn second_difference(u: &[f64], dt: f64) -> Vec<f64> {
    let n = u.len();
    let h2 = dt * dt;
    let mut a = vec![0.0; n];
    if n < 3 {
        return a;
    }
    for i in 1..n - 1 {
        a[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / h2;
    }
    a[0] = (u[0] - 2.0 * u[1] + u[2]) / h2;
    a[n - 1] = (u[n - 1] - 2.0 * u[n - 2] + u[n - 3]) / h2;
    a
}

/// Moment-rate history with its running integrals, evaluated off-grid.
struct MomentHistory<'a> {
    rate: &'a [f64],
    dt: f64,
    /// m(t_k)
    moment: Vec<f64>,
    /// ∫₀^{t_k} m
    f1: Vec<f64>,
    /// ∫₀^{t_k} s·m(s) ds
    f2: Vec<f64>,
}

impl<'a> MomentHistory<'a> {
    fn new(stf: &'a SourceTimeFunction) -> Self {
        let rate = stf.samples();
        let dt = stf.dt();
        let n = rate.len();
        let mut moment = vec![0.0; n];
        for k in 1..n {
            moment[k] = moment[k - 1] + 0.5 * (rate[k - 1] + rate[k]) * dt;
        }
        let mut f1 = vec![0.0; n];
        let mut f2 = vec![0.0; n];
        for k in 1..n {
            let (ta, tb) = ((k - 1) as f64 * dt, k as f64 * dt);
            f1[k] = f1[k - 1] + 0.5 * (moment[k - 1] + moment[k]) * dt;
            f2[k] = f2[k - 1] + 0.5 * (ta * moment[k - 1] + tb * moment[k]) * dt;
        }
        Self {
            rate,
            dt,
            moment,
            f1,
            f2,
        }
    }

    fn end(&self) -> f64 {
        self.dt * (self.rate.len() - 1) as f64
    }

    fn locate(&self, t: f64) -> (usize, f64) {
        let x = t / self.dt;
        let k = (x.floor() as usize).min(self.rate.len() - 2);
        (k, t - k as f64 * self.dt)
    }

    fn rate_at(&self, t: f64) -> f64 {
        if t <= 0.0 || t >= self.end() {
            return 0.0;
        }
        let (k, h) = self.locate(t);
        let w = h / self.dt;
        self.rate[k] * (1.0 - w) + self.rate[k + 1] * w
    }

    fn moment_at(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let end = self.end();
        if t >= end {
            return self.moment[self.moment.len() - 1];
        }
        let (k, h) = self.locate(t);
        let slope = (self.rate[k + 1] - self.rate[k]) / self.dt;
        self.moment[k] + self.rate[k] * h + 0.5 * slope * h * h
    }

    /// (∫₀^x m, ∫₀^x s·m(s) ds)
    fn integrals_at(&self, x: f64) -> (f64, f64) {
        if x <= 0.0 {
            return (0.0, 0.0);
        }
        let end = self.end();
        let last = self.f1.len() - 1;
        if x >= end {
            let m_end = self.moment[last];
            return (
                self.f1[last] + m_end * (x - end),
                self.f2[last] + 0.5 * m_end * (x * x - end * end),
            );
        }
        let (k, h) = self.locate(x);
        let mx = self.moment_at(x);
        let tk = k as f64 * self.dt;
        (
            self.f1[k] + 0.5 * (self.moment[k] + mx) * h,
            self.f2[k] + 0.5 * (tk * self.moment[k] + x * mx) * h,
        )
    }

    /// ∫_{ra}^{rb} τ m(t − τ) dτ
    fn near_field_integral(&self, t: f64, ra: f64, rb: f64) -> f64 {
        let (lo, hi) = (t - rb, t - ra);
        if hi <= 0.0 {
            return 0.0;
        }
        let (f1_hi, f2_hi) = self.integrals_at(hi);
        let (f1_lo, f2_lo) = self.integrals_at(lo);
        t * (f1_hi - f1_lo) - (f2_hi - f2_lo)
    }
}

/// Evaluates every term of the full-space field at the receiver.
pub fn synth_fullspace_terms(
    scenario: &PointSourceScenario,
    fm: &FocalMechanism,
    stf: &SourceTimeFunction,
) -> Result<FieldTerms> {
    scenario.validate(stf.rise_time())?;
    let r = scenario.hypocentral_distance();
    let off = scenario.offset();
    let gamma = off.map(|d| d / r);
    let m = moment_tensor(fm, scenario.m0)?.as_matrix();
    let mg: [f64; 3] = std::array::from_fn(|i| (0..3).map(|j| m[i][j] * gamma[j]).sum());
    let a: f64 = (0..3).map(|i| gamma[i] * mg[i]).sum();
    let tr = m[0][0] + m[1][1] + m[2][2];

    let Medium { rho, vp: alpha, vs: beta } = scenario.medium;
    let scale = 1.0 / (4.0 * PI * rho);
    let (ta, tb) = (r / alpha, r / beta);

    let coef = |f: &dyn Fn(usize) -> f64| -> [f64; 3] { std::array::from_fn(|n| f(n)) };
    let near = coef(&|n| (15.0 * gamma[n] * a - 3.0 * gamma[n] * tr - 6.0 * mg[n]) / r.powi(4));
    let ip = coef(&|n| (6.0 * gamma[n] * a - gamma[n] * tr - 2.0 * mg[n]) / (alpha * alpha * r * r));
    let is = coef(&|n| -(6.0 * gamma[n] * a - gamma[n] * tr - 3.0 * mg[n]) / (beta * beta * r * r));
    let fp = coef(&|n| gamma[n] * a / (alpha.powi(3) * r));
    let fs = coef(&|n| -(gamma[n] * a - mg[n]) / (beta.powi(3) * r));

    let hist = MomentHistory::new(stf);
    let n = scenario.n_samples();
    let mut terms: [[Vec<f64>; 3]; 5] = Default::default();
    for term in terms.iter_mut() {
        for c in term.iter_mut() {
            *c = vec![0.0; n];
        }
    }
    for k in 0..n {
        let t = k as f64 * scenario.dt;
        let shapes = [
            hist.near_field_integral(t, ta, tb),
            hist.moment_at(t - ta),
            hist.moment_at(t - tb),
            hist.rate_at(t - ta),
            hist.rate_at(t - tb),
        ];
        for (idx, (shape, c)) in shapes.iter().zip([&near, &ip, &is, &fp, &fs]).enumerate() {
            if *shape == 0.0 {
                continue;
            }
            for comp in 0..3 {
                terms[idx][comp][k] = scale * c[comp] * shape;
            }
        }
    }

    Ok(FieldTerms {
        dt: scenario.dt,
        terms,
        station_id: scenario.station_id.clone(),
        epicentral_distance: scenario.epicentral_distance(),
    })
}

/// Three-component acceleration (EW = y, NS = x, UD = −z) at the receiver.
pub fn synth_fullspace(
    scenario: &PointSourceScenario,
    fm: &FocalMechanism,
    stf: &SourceTimeFunction,
) -> Result<Record3C> {
    synth_fullspace_terms(scenario, fm, stf)?.acceleration(&Term::ALL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::liu_stf;

    fn scenario_at(direction: [f64; 3], r: f64, duration: f64) -> PointSourceScenario {
        let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
        let g = direction.map(|v| v / norm);
        // place the source below the receiver so that the receiver sits at z = 0
        let depth = if g[2] < 0.0 { -g[2] * r } else { r };
        let hypo = Position { x: 0.0, y: 0.0, z: depth };
        PointSourceScenario {
            hypocenter: hypo,
            receiver: Position {
                x: hypo.x + g[0] * r,
                y: hypo.y + g[1] * r,
                z: hypo.z + g[2] * r,
            },
            duration,
            ..PointSourceScenario::default()
        }
    }

    #[test]
    fn near_field_integral_matches_quadrature() {
        let stf = liu_stf(1.0, 0.005).unwrap();
        let hist = MomentHistory::new(&stf);
        let (ra, rb) = (2.0, 3.3);
        for &t in &[1.0, 2.5, 3.0, 4.1, 5.0, 8.0] {
            let n = 20_000;
            let h = (rb - ra) / n as f64;
            let brute: f64 = (0..=n)
                .map(|i| {
                    let tau = ra + i as f64 * h;
                    let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                    w * tau * hist.moment_at(t - tau)
                })
                .sum::<f64>()
                * h;
            let fast = hist.near_field_integral(t, ra, rb);
            assert!((fast - brute).abs() < 1e-5 * brute.abs().max(1e-3), "t={t}: {fast} vs {brute}");
        }
    }

    #[test]
    fn static_offset_decays_as_inverse_square() {
        // long after both arrivals the displacement settles to the static field ∝ 1/r²
        let fm = FocalMechanism::new(30.0, 60.0, 45.0).unwrap();
        let stf = liu_stf(0.5, 0.005).unwrap();
        let dir = [0.6, 0.3, -0.5];
        let finals: Vec<f64> = [5_000.0, 10_000.0]
            .iter()
            .map(|&r| {
                let sc = scenario_at(dir, r, r / 2047.0 + 4.0);
                let terms = synth_fullspace_terms(&sc, &fm, &stf).unwrap();
                let u: f64 = (0..3)
                    .map(|c| {
                        let v: f64 = Term::ALL.iter().map(|t| *terms.displacement(*t)[c].last().unwrap()).sum();
                        v * v
                    })
                    .sum::<f64>()
                    .sqrt();
                u
            })
            .collect();
        let ratio = finals[0] / finals[1];
        assert!((ratio - 4.0).abs() < 0.01 * 4.0, "ratio {ratio}");
    }

    #[test]
    fn linear_in_moment() {
        let fm = FocalMechanism::new(45.0, 55.0, 90.0).unwrap();
        let stf = liu_stf(1.0, 0.005).unwrap();
        let base = PointSourceScenario::default();
        let doubled = PointSourceScenario { m0: base.m0 * 2.0, ..base.clone() };
        let a = synth_fullspace(&base, &fm, &stf).unwrap();
        let b = synth_fullspace(&doubled, &fm, &stf).unwrap();
        for c in crate::signal::Component::ALL {
            for (x, y) in a.component(c).samples().iter().zip(b.component(c).samples()) {
                assert_eq!(2.0 * x, *y);
            }
        }
    }

    #[test]
    fn causal_first_motion() {
        let fm = FocalMechanism::new(45.0, 55.0, 90.0).unwrap();
        let stf = liu_stf(1.0, 0.005).unwrap();
        let sc = PointSourceScenario::default();
        let rec = synth_fullspace(&sc, &fm, &stf).unwrap();
        let tp = sc.p_arrival();
        for c in crate::signal::Component::ALL {
            let ts = rec.component(c);
            for (i, v) in ts.samples().iter().enumerate() {
                if ts.time(i) <= tp - sc.dt {
                    assert_eq!(*v, 0.0, "{c} sample {i}");
                }
            }
            assert!(ts.peak_abs() > 0.0);
        }
    }

    #[test]
    fn rejects_bad_geometry() {
        let fm = FocalMechanism::new(45.0, 55.0, 90.0).unwrap();
        let stf = liu_stf(1.0, 0.005).unwrap();
        let mut sc = PointSourceScenario::default();
        sc.receiver = sc.hypocenter;
        assert!(matches!(synth_fullspace(&sc, &fm, &stf), Err(Error::Geometry(_))));
        let mut sc = PointSourceScenario::default();
        sc.duration = 5.0;
        assert!(synth_fullspace(&sc, &fm, &stf).is_err());
        let mut sc = PointSourceScenario::default();
        sc.medium.vs = sc.medium.vp + 1.0;
        assert!(synth_fullspace(&sc, &fm, &stf).is_err());
    }

    #[test]
    fn scenario_json_schema() {
        let f = ScenarioFile::default();
        let text = serde_json::to_string_pretty(&f).unwrap();
        for key in ["hypocenter", "receiver", "medium", "m0", "mechanism", "rise_time", "dt", "duration"] {
            assert!(text.contains(&format!("\"{key}\"")), "missing {key}");
        }
        let back: ScenarioFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back, f);
        let bad = text.replace("\"dip\": 55.0", "\"dip\": 95.0");
        assert!(serde_json::from_str::<ScenarioFile>(&bad).is_err());
    }
}
