//! Intensity-measure goodness of fit on a 0–10 scale, band by band.
//!
//! Both traces are band-pass filtered into each frequency band, reduced to an
//! [`IntensityVector`], and every measure is compared with [`score_scalar`].
//! Spectral measures are scored point by point inside the band and averaged.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imeasures::{cross_correlation, intensity_vector, ImConfig, IntensityVector};
use crate::signal::{
    bandpass, detrend, taper, ByComponent, Component, DetrendMode, Record3C, TimeSeries,
};

/// The ten compared measures, in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Im {
    #[serde(rename = "PGA")]
    Pga,
    #[serde(rename = "PGV")]
    Pgv,
    #[serde(rename = "PGD")]
    Pgd,
    Ia,
    Da,
    De,
    Iv,
    Sa,
    Fs,
    #[serde(rename = "C*")]
    CStar,
}

impl Im {
    pub const ALL: [Im; 10] = [
        Im::Pga,
        Im::Pgv,
        Im::Pgd,
        Im::Ia,
        Im::Da,
        Im::De,
        Im::Iv,
        Im::Sa,
        Im::Fs,
        Im::CStar,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Im::Pga => "PGA",
            Im::Pgv => "PGV",
            Im::Pgd => "PGD",
            Im::Ia => "Ia",
            Im::Da => "Da",
            Im::De => "De",
            Im::Iv => "Iv",
            Im::Sa => "Sa",
            Im::Fs => "Fs",
            Im::CStar => "C*",
        }
    }

    pub fn index(self) -> usize {
        Im::ALL.iter().position(|&m| m == self).expect("listed")
    }
}

impl fmt::Display for Im {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Frequency band in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

impl Band {
    /// Inclusive membership with a relative slack of 1e-9 at the edges.
    pub fn contains(&self, f: f64) -> bool {
        f >= self.lo * (1.0 - 1e-9) && f <= self.hi * (1.0 + 1e-9)
    }
}

/// Ordered, non-empty list of bands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct BandSpec {
    bands: Vec<Band>,
}

impl BandSpec {
    pub fn new(edges: Vec<(f64, f64)>) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::InvalidParameter("band list is empty".into()));
        }
        for (i, &(lo, hi)) in edges.iter().enumerate() {
            if !(lo > 0.0 && lo < hi && hi.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "band {i}: need 0 < f_lo < f_hi, got ({lo}, {hi})"
                )));
            }
            if i > 0 && lo < edges[i - 1].0 {
                return Err(Error::InvalidParameter(
                    "bands must be ordered by ascending f_lo".into(),
                ));
            }
        }
        Ok(Self {
            bands: edges.into_iter().map(|(lo, hi)| Band { lo, hi }).collect(),
        })
    }

    pub fn bands(&self) -> &[Band] {
        &self.bands
    }

    pub fn len(&self) -> usize {
        self.bands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bands.is_empty()
    }
}

impl Default for BandSpec {
    fn default() -> Self {
        BandSpec::new(vec![
            (0.05, 0.1),
            (0.1, 0.25),
            (0.25, 0.5),
            (0.5, 1.0),
            (1.0, 2.0),
            (2.0, 5.0),
            (5.0, 10.0),
        ])
        .expect("default bands are valid")
    }
}

impl TryFrom<Vec<(f64, f64)>> for BandSpec {
    type Error = Error;
    fn try_from(v: Vec<(f64, f64)>) -> Result<Self> {
        BandSpec::new(v)
    }
}

impl From<BandSpec> for Vec<(f64, f64)> {
    fn from(b: BandSpec) -> Self {
        b.bands.into_iter().map(|b| (b.lo, b.hi)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QualityLevel {
    Poor,
    Fair,
    Good,
    Excellent,
}

impl QualityLevel {
    /// Bins `[.., 4)`, `[4, 6)`, `[6, 8)`, `[8, 10]`.
    pub fn from_score(score: f64) -> Self {
        if score >= 8.0 {
            QualityLevel::Excellent
        } else if score >= 6.0 {
            QualityLevel::Good
        } else if score >= 4.0 {
            QualityLevel::Fair
        } else {
            QualityLevel::Poor
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            QualityLevel::Poor => "poor",
            QualityLevel::Fair => "fair",
            QualityLevel::Good => "good",
            QualityLevel::Excellent => "excellent",
        }
    }
}

impl fmt::Display for QualityLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `10·exp(−((p1 − p2) / min(|p1|, |p2|))²)`; identical inputs score 10 and
/// a zero denominator otherwise scores 0.
pub fn score_scalar(p1: f64, p2: f64) -> f64 {
    if p1 == p2 {
        return 10.0;
    }
    let den = p1.abs().min(p2.abs());
    if !(den > 0.0) || !p1.is_finite() || !p2.is_finite() {
        return 0.0;
    }
    let x = (p1 - p2) / den;
    10.0 * (-x * x).exp()
}

/// Score of a correlation coefficient: `10·max(0, ρ)`.
pub fn score_correlation(rho: f64) -> f64 {
    10.0 * rho.clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AndersonConfig {
    pub bands: BandSpec,
    pub filter_order: usize,
    pub zero_phase: bool,
    /// Taper fraction applied at each end before filtering.
    pub taper_fraction: f64,
    /// Largest lag searched by the cross-correlation, in seconds.
    pub max_lag: f64,
    pub im: ImConfig,
}

impl Default for AndersonConfig {
    fn default() -> Self {
        Self {
            bands: BandSpec::default(),
            filter_order: 4,
            zero_phase: true,
            taper_fraction: 0.05,
            max_lag: 0.5,
            im: ImConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandScores {
    pub band: Band,
    /// Scores in [`Im::ALL`] order; `None` when the band was skipped.
    pub scores: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub skipped: Option<String>,
}

impl BandScores {
    pub fn score(&self, im: Im) -> Option<f64> {
        self.scores.as_ref().map(|s| s[im.index()])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub max: f64,
    pub mean: f64,
    pub min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AndersonScores {
    pub bands: Vec<BandScores>,
    /// One entry per measure, in [`Im::ALL`] order.
    pub aggregates: Vec<(Im, Aggregate)>,
}

impl AndersonScores {
    pub fn aggregate(&self, im: Im) -> Aggregate {
        self.aggregates[im.index()].1
    }

    /// Mean over measures of the per-measure band means.
    pub fn overall(&self) -> f64 {
        self.aggregates.iter().map(|(_, a)| a.mean).sum::<f64>() / self.aggregates.len() as f64
    }

    pub fn skipped_bands(&self) -> impl Iterator<Item = &BandScores> {
        self.bands.iter().filter(|b| b.scores.is_none())
    }
}

/// Max, mean and min per measure over the bands that were scored.
pub fn aggregate(bands: &[BandScores]) -> Result<Vec<(Im, Aggregate)>> {
    let scored: Vec<&Vec<f64>> = bands.iter().filter_map(|b| b.scores.as_ref()).collect();
    if scored.is_empty() {
        return Err(Error::InvalidParameter(
            "no frequency band could be scored".into(),
        ));
    }
    Ok(Im::ALL
        .iter()
        .map(|&im| {
            let k = im.index();
            let mut max = f64::NEG_INFINITY;
            let mut min = f64::INFINITY;
            let mut sum = 0.0;
            for s in &scored {
                max = max.max(s[k]);
                min = min.min(s[k]);
                sum += s[k];
            }
            let mean = (sum / scored.len() as f64).clamp(min, max);
            (im, Aggregate { max, mean, min })
        })
        .collect())
}

fn band_limited(ts: &TimeSeries, band: Band, cfg: &AndersonConfig) -> Result<TimeSeries> {
    let d = detrend(ts, DetrendMode::Mean)?;
    let t = taper(&d, cfg.taper_fraction)?;
    bandpass(&t, band.lo, band.hi, cfg.filter_order, cfg.zero_phase)
}

/// Average of pointwise scores over the entries whose abscissa lies in the band.
fn pointwise_mean<I>(pairs: I) -> Option<f64>
where
    I: Iterator<Item = (f64, f64)>,
{
    let (mut sum, mut n) = (0.0, 0usize);
    for (a, b) in pairs {
        sum += score_scalar(a, b);
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}

fn score_vectors(
    a: &IntensityVector,
    b: &IntensityVector,
    band: Band,
    rho: Result<f64>,
) -> Result<std::result::Result<Vec<f64>, String>> {
    let sa = pointwise_mean(
        a.sa.periods
            .iter()
            .zip(a.sa.values.iter().zip(&b.sa.values))
            .filter(|(p, _)| band.contains(1.0 / **p))
            .map(|(_, (x, y))| (*x, *y)),
    );
    let fs = pointwise_mean(
        a.fs.freqs()
            .iter()
            .zip(a.fs.amplitudes().iter().zip(b.fs.amplitudes()))
            .filter(|(f, _)| band.contains(**f))
            .map(|(_, (x, y))| (*x, *y)),
    );
    let (sa, fs) = match (sa, fs) {
        (Some(sa), Some(fs)) => (sa, fs),
        (None, _) => return Ok(Err("no response-spectrum period inside band".into())),
        (_, None) => return Ok(Err("no Fourier frequency inside band".into())),
    };
    let cstar = match rho {
        Ok(r) => score_correlation(r),
        Err(Error::ZeroVariance) => {
            // both flat: identical; one flat: no fit
            if a.pga == 0.0 && b.pga == 0.0 {
                10.0
            } else {
                0.0
            }
        }
        Err(e) => return Err(e),
    };
    Ok(Ok(vec![
        score_scalar(a.pga, b.pga),
        score_scalar(a.pgv, b.pgv),
        score_scalar(a.pgd, b.pgd),
        score_scalar(a.ia, b.ia),
        score_scalar(a.da, b.da),
        score_scalar(a.de, b.de),
        score_scalar(a.iv, b.iv),
        sa,
        fs,
        cstar,
    ]))
}

/// Scores one pair of acceleration traces on a common grid.
pub fn score_traces(
    rec: &TimeSeries,
    sim: &TimeSeries,
    cfg: &AndersonConfig,
) -> Result<AndersonScores> {
    rec.ensure_same_grid(sim)?;
    let mut bands = Vec::with_capacity(cfg.bands.len());
    for &band in cfg.bands.bands() {
        if band.hi >= rec.nyquist() {
            bands.push(BandScores {
                band,
                scores: None,
                skipped: Some(format!("band reaches Nyquist ({} Hz)", rec.nyquist())),
            });
            continue;
        }
        let a = band_limited(rec, band, cfg)?;
        let b = band_limited(sim, band, cfg)?;
        let va = intensity_vector(&a, &cfg.im)?;
        let vb = intensity_vector(&b, &cfg.im)?;
        let rho = cross_correlation(&a, &b, cfg.max_lag);
        let entry = match score_vectors(&va, &vb, band, rho)? {
            Ok(s) => BandScores {
                band,
                scores: Some(s),
                skipped: None,
            },
            Err(why) => {
                log::warn!("skipping band {}-{} Hz: {why}", band.lo, band.hi);
                BandScores {
                    band,
                    scores: None,
                    skipped: Some(why),
                }
            }
        };
        bands.push(entry);
    }
    let aggregates = aggregate(&bands)?;
    Ok(AndersonScores { bands, aggregates })
}

/// Scores every component of two aligned records.
pub fn score_pair(
    rec: &Record3C,
    sim: &Record3C,
    cfg: &AndersonConfig,
) -> Result<ByComponent<AndersonScores>> {
    ByComponent::try_build(|c| score_traces(rec.component(c), sim.component(c), cfg))
}

/// Long-format table `component,im,band_lo,band_hi,score`.
pub fn scores_csv(scores: &ByComponent<AndersonScores>, only: Option<Component>) -> String {
    let mut out = String::from("component,im,band_lo,band_hi,score\n");
    for (c, s) in scores.iter() {
        if only.is_some_and(|o| o != c) {
            continue;
        }
        for b in &s.bands {
            let Some(v) = &b.scores else { continue };
            for im in Im::ALL {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    c.name(),
                    im.name(),
                    b.band.lo,
                    b.band.hi,
                    v[im.index()]
                ));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::Unit;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn wavelet(dt: f64, n: usize, f0: f64, t0: f64) -> TimeSeries {
        let x = (0..n)
            .map(|i| {
                let t = i as f64 * dt - t0;
                let a = (PI * f0 * t).powi(2);
                (1.0 - 2.0 * a) * (-a).exp()
            })
            .collect();
        TimeSeries::new(dt, 0.0, x, Unit::Acceleration, "w").unwrap()
    }

    fn broadband(dt: f64, n: usize) -> TimeSeries {
        let mut x = vec![0.0; n];
        for (k, f0) in [0.08, 0.2, 0.6, 1.5, 4.0, 8.0].iter().enumerate() {
            let w = wavelet(dt, n, *f0, 6.0 + k as f64);
            for (xi, wi) in x.iter_mut().zip(w.samples()) {
                *xi += wi;
            }
        }
        TimeSeries::new(dt, 0.0, x, Unit::Acceleration, "bb").unwrap()
    }

    #[test]
    fn scalar_score_closed_forms() {
        assert_eq!(score_scalar(3.7, 3.7), 10.0);
        assert!((score_scalar(1.0, 2.0) - 10.0 * (-1.0_f64).exp()).abs() < 1e-12);
        assert_eq!(score_scalar(0.0, 0.0), 10.0);
        assert_eq!(score_scalar(0.0, 2.0), 0.0);
        assert_eq!(score_scalar(2.0, 0.0), 0.0);
        // opposite signs use min(|p1|, |p2|)
        let s = score_scalar(-1.0, 1.0);
        assert!((s - 10.0 * (-4.0_f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn quality_bins() {
        assert_eq!(QualityLevel::from_score(5.54), QualityLevel::Fair);
        assert_eq!(QualityLevel::from_score(6.10), QualityLevel::Good);
        assert_eq!(QualityLevel::from_score(0.3), QualityLevel::Poor);
        assert_eq!(QualityLevel::from_score(3.999), QualityLevel::Poor);
        assert_eq!(QualityLevel::from_score(4.0), QualityLevel::Fair);
        assert_eq!(QualityLevel::from_score(8.0), QualityLevel::Excellent);
        assert_eq!(QualityLevel::from_score(10.0), QualityLevel::Excellent);
    }

    #[test]
    fn band_spec_validation() {
        assert_eq!(BandSpec::default().len(), 7);
        assert!(BandSpec::new(vec![]).is_err());
        assert!(BandSpec::new(vec![(1.0, 0.5)]).is_err());
        assert!(BandSpec::new(vec![(1.0, 2.0), (0.5, 1.0)]).is_err());
        let json = serde_json::to_string(&BandSpec::default()).unwrap();
        let back: BandSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, BandSpec::default());
        assert!(serde_json::from_str::<BandSpec>("[[2.0, 1.0]]").is_err());
    }

    #[test]
    fn self_comparison_is_perfect() {
        let ts = broadband(0.01, 3000);
        let s = score_traces(&ts, &ts, &AndersonConfig::default()).unwrap();
        assert_eq!(s.skipped_bands().count(), 0);
        for b in &s.bands {
            assert!(b.scores.as_ref().unwrap().iter().all(|&v| v == 10.0));
        }
        for (_, a) in &s.aggregates {
            assert_eq!((a.max, a.mean, a.min), (10.0, 10.0, 10.0));
        }
    }

    #[test]
    fn doubled_amplitude_pga_score() {
        let ts = broadband(0.01, 3000);
        let s = score_traces(&ts, &ts.scaled(2.0).unwrap(), &AndersonConfig::default()).unwrap();
        let want = 10.0 * (-1.0_f64).exp();
        for b in &s.bands {
            let v = b.score(Im::Pga).unwrap();
            assert!((v - want).abs() < 1e-9, "{:?}: {v}", b.band);
            // shape-only measures are unaffected by scaling
            assert!((b.score(Im::CStar).unwrap() - 10.0).abs() < 1e-9);
            assert!((b.score(Im::Da).unwrap() - 10.0).abs() < 1e-6);
        }
    }

    #[test]
    fn bands_above_nyquist_are_flagged() {
        let ts = broadband(0.05, 1200); // Nyquist 10 Hz
        let s = score_traces(&ts, &ts, &AndersonConfig::default()).unwrap();
        let skipped: Vec<_> = s.skipped_bands().collect();
        assert_eq!(skipped.len(), 1);
        assert_eq!(skipped[0].band.hi, 10.0);
        let csv = scores_csv(
            &ByComponent {
                ew: s.clone(),
                ns: s.clone(),
                ud: s,
            },
            Some(Component::Ns),
        );
        assert_eq!(csv.lines().count(), 1 + 6 * 10);
        assert!(csv.lines().skip(1).all(|l| l.starts_with("ns,")));
    }

    #[test]
    fn flat_traces() {
        let z = TimeSeries::new(0.01, 0.0, vec![0.0; 2000], Unit::Acceleration, "z").unwrap();
        let s = score_traces(&z, &z, &AndersonConfig::default()).unwrap();
        assert!(s.aggregates.iter().all(|(_, a)| a.min == 10.0));
        let ts = broadband(0.01, 2000);
        let s = score_traces(&z, &ts, &AndersonConfig::default()).unwrap();
        assert_eq!(s.aggregate(Im::CStar).max, 0.0);
        assert_eq!(s.aggregate(Im::Pga).max, 0.0);
    }

    #[test]
    fn aggregate_ordering_and_errors() {
        let band = Band { lo: 1.0, hi: 2.0 };
        let bands = vec![
            BandScores { band, scores: Some(vec![2.0; 10]), skipped: None },
            BandScores { band, scores: None, skipped: Some("x".into()) },
            BandScores { band, scores: Some(vec![5.0; 10]), skipped: None },
        ];
        let agg = aggregate(&bands).unwrap();
        assert_eq!(agg[0].1, Aggregate { max: 5.0, mean: 3.5, min: 2.0 });
        assert!(aggregate(&bands[1..2]).is_err());
    }

    proptest! {
        #[test]
        fn scalar_score_symmetric_bounded(a in -1e3f64..1e3, b in -1e3f64..1e3) {
            let s = score_scalar(a, b);
            prop_assert_eq!(s, score_scalar(b, a));
            prop_assert!((0.0..=10.0).contains(&s));
            if a != b { prop_assert!(s < 10.0); }
        }

        #[test]
        fn pga_score_monotone_in_log_scale(l1 in 0.0f64..2.0, l2 in 0.0f64..2.0) {
            // |log c| larger → score not larger; both signs of log c
            let (lo, hi) = if l1 <= l2 { (l1, l2) } else { (l2, l1) };
            for sign in [1.0, -1.0] {
                let s_lo = score_scalar(1.0, (sign * lo).exp());
                let s_hi = score_scalar(1.0, (sign * hi).exp());
                prop_assert!(s_hi <= s_lo + 1e-12);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]
        #[test]
        fn pair_scores_symmetric(shift in 0.0f64..3.0, c in 0.3f64..3.0) {
            let dt = 0.01;
            let a = broadband(dt, 2000);
            let b = wavelet(dt, 2000, 1.2, 5.0 + shift).scaled(c).unwrap();
            let cfg = AndersonConfig::default();
            let ab = score_traces(&a, &b, &cfg).unwrap();
            let ba = score_traces(&b, &a, &cfg).unwrap();
            prop_assert_eq!(&ab, &ba);
            for (_, g) in &ab.aggregates {
                prop_assert!(g.min >= 0.0 && g.max <= 10.0);
                prop_assert!(g.min <= g.mean && g.mean <= g.max);
            }
        }
    }
}
