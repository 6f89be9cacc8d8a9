//! Focal-mechanism sweeps and the correlation of fault angles with
//! goodness-of-fit metrics.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::anderson::{Im, QualityLevel};
use crate::error::{Error, Result};
use crate::gof::{evaluate_pair, GofConfig, PairGof};
use crate::signal::{ByComponent, Component, Record3C};
use crate::source::FocalMechanism;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Param {
    Strike,
    Dip,
    Rake,
}

impl Param {
    pub const ALL: [Param; 3] = [Param::Strike, Param::Dip, Param::Rake];

    pub fn name(self) -> &'static str {
        match self {
            Param::Strike => "strike",
            Param::Dip => "dip",
            Param::Rake => "rake",
        }
    }

    pub fn value(self, fm: &FocalMechanism) -> f64 {
        match self {
            Param::Strike => fm.strike(),
            Param::Dip => fm.dip(),
            Param::Rake => fm.rake(),
        }
    }

    pub fn parse(s: &str) -> Option<Param> {
        Param::ALL.into_iter().find(|p| p.name() == s)
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Goodness-of-fit metric used as a correlation column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    Eg,
    Pg,
    Im(Im),
}

impl Metric {
    pub fn all() -> Vec<Metric> {
        [Metric::Eg, Metric::Pg]
            .into_iter()
            .chain(Im::ALL.into_iter().map(Metric::Im))
            .collect()
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::Eg => "EG",
            Metric::Pg => "PG",
            Metric::Im(im) => im.name(),
        }
    }

    pub fn parse(s: &str) -> Option<Metric> {
        Metric::all().into_iter().find(|m| m.name() == s)
    }

    /// EG/PG for the TF metrics, the mean over bands for the IM scores.
    pub fn value(self, gof: &PairGof, c: Component) -> f64 {
        match self {
            Metric::Eg => gof.tf.get(c).eg,
            Metric::Pg => gof.tf.get(c).pg,
            Metric::Im(im) => gof.anderson.get(c).aggregate(im).mean,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for Metric {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Metric {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Metric::parse(&s).ok_or_else(|| serde::de::Error::custom(format!("unknown metric {s}")))
    }
}

/// Half-widths of the sweep around the centre mechanism, degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Deltas {
    pub strike: f64,
    pub dip: f64,
    pub rake: f64,
}

impl Default for Deltas {
    fn default() -> Self {
        Self {
            strike: 5.0,
            dip: 5.0,
            rake: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub strikes: Vec<f64>,
    pub dips: Vec<f64>,
    pub rakes: Vec<f64>,
}

impl SweepGrid {
    pub fn len(&self) -> usize {
        self.strikes.len() * self.dips.len() * self.rakes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cartesian product ordered by (strike, dip, rake).
    pub fn mechanisms(&self) -> Result<Vec<FocalMechanism>> {
        let mut out = Vec::with_capacity(self.len());
        for &s in &self.strikes {
            for &d in &self.dips {
                for &r in &self.rakes {
                    out.push(FocalMechanism::new(s, d, r)?);
                }
            }
        }
        out.sort_by(mech_order);
        Ok(out)
    }
}

fn mech_order(a: &FocalMechanism, b: &FocalMechanism) -> std::cmp::Ordering {
    a.strike()
        .total_cmp(&b.strike())
        .then(a.dip().total_cmp(&b.dip()))
        .then(a.rake().total_cmp(&b.rake()))
}

/// `{c − Δ, c, c + Δ}` per angle, or `{c}` when `Δ = 0`.
pub fn build_grid(center: &FocalMechanism, deltas: &Deltas) -> Result<SweepGrid> {
    let values = |c: f64, d: f64, name: &str| -> Result<Vec<f64>> {
        if !(d >= 0.0 && d.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "{name} delta must be >= 0, got {d}"
            )));
        }
        Ok(if d == 0.0 { vec![c] } else { vec![c - d, c, c + d] })
    };
    let strikes = values(center.strike(), deltas.strike, "strike")?;
    let dips = values(center.dip(), deltas.dip, "dip")?;
    let rakes = values(center.rake(), deltas.rake, "rake")?;
    if strikes.iter().any(|s| !(0.0..360.0).contains(s)) {
        return Err(Error::InvalidParameter(format!(
            "strike values {strikes:?} leave [0, 360)"
        )));
    }
    if dips.iter().any(|d| !(0.0..=90.0).contains(d)) {
        return Err(Error::InvalidParameter(format!(
            "dip values {dips:?} leave [0, 90]"
        )));
    }
    if rakes.iter().any(|r| !(*r > -180.0 && *r <= 180.0)) {
        return Err(Error::InvalidParameter(format!(
            "rake values {rakes:?} leave (-180, 180]"
        )));
    }
    Ok(SweepGrid {
        strikes,
        dips,
        rakes,
    })
}

/// Directory-safe label `<strike>_<dip>_<rake>`.
pub fn run_label(fm: &FocalMechanism) -> String {
    format!("{}_{}_{}", fm.strike(), fm.dip(), fm.rake())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub mechanism: FocalMechanism,
    pub gof: PairGof,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub result: RunResult,
    pub trace: Record3C,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFailure {
    pub mechanism: FocalMechanism,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub runs: Vec<RunOutput>,
    pub failures: Vec<RunFailure>,
}

impl Sweep {
    pub fn is_partial(&self) -> bool {
        !self.failures.is_empty()
    }

    pub fn results(&self) -> Vec<RunResult> {
        self.runs.iter().map(|r| r.result.clone()).collect()
    }
}

/// Runs every mechanism of `grid` on at most `workers` threads. `provider`
/// returns the simulated record for a mechanism; each is scored against
/// `reference`. Failing runs are recorded and do not abort the sweep.
pub fn run_sweep<P>(
    grid: &SweepGrid,
    reference: &Record3C,
    cfg: &GofConfig,
    workers: usize,
    provider: P,
) -> Result<Sweep>
where
    P: Fn(&FocalMechanism) -> Result<Record3C> + Sync,
{
    if workers == 0 {
        return Err(Error::InvalidParameter("worker count must be >= 1".into()));
    }
    let mechanisms = grid.mechanisms()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let outcomes: Vec<(FocalMechanism, Result<RunOutput>)> = pool.install(|| {
        mechanisms
            .par_iter()
            .map(|fm| {
                let out = provider(fm).and_then(|trace| {
                    let (gof, _) = evaluate_pair(reference, &trace, cfg)?;
                    Ok(RunOutput {
                        result: RunResult {
                            mechanism: *fm,
                            gof,
                        },
                        trace,
                    })
                });
                (*fm, out)
            })
            .collect()
    });
    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for (fm, out) in outcomes {
        match out {
            Ok(r) => runs.push(r),
            Err(e) => {
                log::warn!("run {} failed: {e}", run_label(&fm));
                failures.push(RunFailure {
                    mechanism: fm,
                    error: e.to_string(),
                });
            }
        }
    }
    Ok(Sweep { runs, failures })
}

/// Sample Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidParameter(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "need at least 3 pairs, got {}",
            x.len()
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    // relative threshold: values equal up to rounding count as constant
    let flat = |s: f64, m: f64| s <= (1e-13 * m.abs().max(f64::MIN_POSITIVE)).powi(2) * n;
    if flat(sxx, mx) || flat(syy, my) {
        return Err(Error::ConstantInput);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Two-sided p-value of `r` under the null of no correlation, from the
/// t statistic with `n − 2` degrees of freedom.
pub fn p_value(r: f64, n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "need n >= 3 for a p-value, got {n}"
        )));
    }
    if !(-1.0..=1.0).contains(&r) {
        return Err(Error::InvalidParameter(format!("|r| must be <= 1, got {r}")));
    }
    if r.abs() == 1.0 {
        return Ok(0.0);
    }
    let df = (n - 2) as f64;
    let t = r * (df / (1.0 - r * r)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok((2.0 * dist.sf(t.abs())).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Cell {
    Defined { r: f64, p: f64 },
    /// Constant column or too few runs.
    Undefined,
    /// Masked as not significant.
    Blank,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTable {
    pub component: Component,
    pub n: usize,
    pub params: Vec<Param>,
    pub metrics: Vec<Metric>,
    /// `cells[param][metric]`.
    pub cells: Vec<Vec<Cell>>,
}

impl CorrelationTable {
    pub fn cell(&self, p: Param, m: Metric) -> Cell {
        let i = self.params.iter().position(|&q| q == p).expect("param");
        let j = self.metrics.iter().position(|&q| q == m).expect("metric");
        self.cells[i][j]
    }

    /// Blanks every cell with `p > alpha`; undefined cells stay undefined.
    pub fn significant(&self, alpha: f64) -> CorrelationTable {
        let mut out = self.clone();
        for row in &mut out.cells {
            for c in row.iter_mut() {
                if let Cell::Defined { p, .. } = *c {
                    if p > alpha {
                        *c = Cell::Blank;
                    }
                }
            }
        }
        out
    }

    /// `parameter,metric,n,r,p,r_significant`; `r_significant` is empty when
    /// the cell is masked at `alpha`.
    pub fn to_csv(&self, alpha: f64) -> Result<String> {
        let masked = self.significant(alpha);
        let mut w = csv::Writer::from_writer(Vec::new());
        for (i, &param) in self.params.iter().enumerate() {
            for (j, &metric) in self.metrics.iter().enumerate() {
                let (r, p) = match self.cells[i][j] {
                    Cell::Defined { r, p } => (Some(r), Some(p)),
                    _ => (None, None),
                };
                let shown = match masked.cells[i][j] {
                    Cell::Defined { r, .. } => Some(r),
                    _ => None,
                };
                w.serialize(CorrelationRow {
                    parameter: param,
                    metric,
                    n: self.n,
                    r,
                    p,
                    r_significant: shown,
                })
                .map_err(csv_err)?;
            }
        }
        finish_csv(w)
    }
}

/// One line of a `correlations_<component>.csv` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub parameter: Param,
    pub metric: Metric,
    pub n: usize,
    pub r: Option<f64>,
    pub p: Option<f64>,
    pub r_significant: Option<f64>,
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::InvalidParameter(format!("csv: {e}"))
}

pub(crate) fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidParameter(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Correlation of every fault angle with every metric over all runs.
pub fn correlation_table(results: &[RunResult], component: Component) -> CorrelationTable {
    let metrics = Metric::all();
    let n = results.len();
    let cells = Param::ALL
        .iter()
        .map(|&param| {
            let x: Vec<f64> = results.iter().map(|r| param.value(&r.mechanism)).collect();
            metrics
                .iter()
                .map(|&m| {
                    let y: Vec<f64> = results.iter().map(|r| m.value(&r.gof, component)).collect();
                    match pearson(&x, &y).and_then(|r| Ok((r, p_value(r, n)?))) {
                        Ok((r, p)) => Cell::Defined { r, p },
                        Err(_) => Cell::Undefined,
                    }
                })
                .collect()
        })
        .collect();
    CorrelationTable {
        component,
        n,
        params: Param::ALL.to_vec(),
        metrics,
        cells,
    }
}

pub fn correlation_tables(results: &[RunResult]) -> ByComponent<CorrelationTable> {
    ByComponent {
        ew: correlation_table(results, Component::Ew),
        ns: correlation_table(results, Component::Ns),
        ud: correlation_table(results, Component::Ud),
    }
}

/// Number of distinct values a parameter takes across the runs.
pub fn distinct_values(results: &[RunResult], param: Param) -> usize {
    let mut v: Vec<f64> = results.iter().map(|r| param.value(&r.mechanism)).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.len()
}

/// One score in the grouped-by-parameter table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRow {
    pub component: Component,
    pub parameter: Param,
    pub value: f64,
    pub strike: f64,
    pub dip: f64,
    pub rake: f64,
    pub metric: Metric,
    pub score: f64,
    pub quality: QualityLevel,
}

/// For every parameter value, the scores of all runs sharing that value,
/// ordered by component, parameter, value and run.
pub fn group_report(results: &[RunResult]) -> Vec<GroupRow> {
    let mut sorted: Vec<&RunResult> = results.iter().collect();
    sorted.sort_by(|a, b| mech_order(&a.mechanism, &b.mechanism));
    let mut rows = Vec::new();
    for c in Component::ALL {
        for param in Param::ALL {
            let mut values: Vec<f64> = sorted.iter().map(|r| param.value(&r.mechanism)).collect();
            values.sort_by(f64::total_cmp);
            values.dedup();
            for v in values {
                for r in sorted.iter().filter(|r| param.value(&r.mechanism) == v) {
                    for m in Metric::all() {
                        let score = m.value(&r.gof, c);
                        rows.push(GroupRow {
                            component: c,
                            parameter: param,
                            value: v,
                            strike: r.mechanism.strike(),
                            dip: r.mechanism.dip(),
                            rake: r.mechanism.rake(),
                            metric: m,
                            score,
                            quality: QualityLevel::from_score(score),
                        });
                    }
                }
            }
        }
    }
    rows
}

pub fn group_csv(rows: &[GroupRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    finish_csv(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anderson::{Aggregate, AndersonScores};
    use crate::tfgof::TfSummary;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn center() -> FocalMechanism {
        FocalMechanism::new(45.0, 55.0, 90.0).unwrap()
    }

    /// A result whose every metric equals `f(mechanism)`.
    fn planted(fm: FocalMechanism, score: f64) -> RunResult {
        let tf = TfSummary {
            eg: score,
            pg: score,
            eg_quality: QualityLevel::from_score(score),
            pg_quality: QualityLevel::from_score(score),
        };
        let agg = Aggregate {
            max: score,
            mean: score,
            min: score,
        };
        let a = AndersonScores {
            bands: vec![],
            aggregates: Im::ALL.iter().map(|&im| (im, agg)).collect(),
        };
        RunResult {
            mechanism: fm,
            gof: PairGof {
                tf: ByComponent { ew: tf, ns: tf, ud: tf },
                anderson: ByComponent {
                    ew: a.clone(),
                    ns: a.clone(),
                    ud: a,
                },
            },
        }
    }

    #[test]
    fn default_grid_has_27_runs() {
        let g = build_grid(&center(), &Deltas::default()).unwrap();
        assert_eq!(g.strikes, vec![40.0, 45.0, 50.0]);
        assert_eq!(g.dips, vec![50.0, 55.0, 60.0]);
        assert_eq!(g.rakes, vec![80.0, 90.0, 100.0]);
        let m = g.mechanisms().unwrap();
        assert_eq!(m.len(), 27);
        assert_eq!((m[0].strike(), m[0].dip(), m[0].rake()), (40.0, 50.0, 80.0));
        assert_eq!((m[26].strike(), m[26].dip(), m[26].rake()), (50.0, 60.0, 100.0));
        assert_eq!(run_label(&m[0]), "40_50_80");
    }

    #[test]
    fn degenerate_and_invalid_grids() {
        let zero = Deltas {
            strike: 0.0,
            dip: 0.0,
            rake: 0.0,
        };
        assert_eq!(build_grid(&center(), &zero).unwrap().len(), 1);
        let steep = FocalMechanism::new(45.0, 88.0, 90.0).unwrap();
        assert!(build_grid(&steep, &Deltas::default()).is_err());
        let edge = FocalMechanism::new(2.0, 55.0, 175.0).unwrap();
        assert!(build_grid(&edge, &Deltas::default()).is_err());
        let neg = Deltas { strike: -1.0, ..Deltas::default() };
        assert!(build_grid(&center(), &neg).is_err());
    }

    #[test]
    fn pearson_linear_and_errors() {
        let x: Vec<f64> = (0..27).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let r = pearson(&x, &y).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        assert!(p_value(r, 27).unwrap() < 1e-6);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &neg).unwrap() + 1.0).abs() < 1e-12);
        assert!(matches!(pearson(&x, &[3.0; 27]), Err(Error::ConstantInput)));
        assert!(pearson(&x[..2], &y[..2]).is_err());
        assert!(pearson(&x, &y[..5]).is_err());
        assert_eq!(p_value(0.0, 27).unwrap(), 1.0);
        assert!(p_value(0.5, 2).is_err());
    }

    #[test]
    fn pearson_matches_nalgebra_route() {
        // r = cos of the angle between centred vectors
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<f64> = (0..40).map(|_| StandardNormal.sample(&mut rng)).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|v| {
                let e: f64 = StandardNormal.sample(&mut rng);
                v + 0.7 * e
            })
            .collect();
        let cx = nalgebra::DVector::from_vec(x.clone()).add_scalar(-x.iter().sum::<f64>() / 40.0);
        let cy = nalgebra::DVector::from_vec(y.clone()).add_scalar(-y.iter().sum::<f64>() / 40.0);
        let want = cx.dot(&cy) / (cx.norm() * cy.norm());
        assert!((pearson(&x, &y).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn p_value_known_quantile() {
        // t_{0.975, 25} = 2.0595 → r = t / sqrt(t² + 25) sits at p = 0.05
        let t = 2.059_538_552_753_294;
        let r = t / (t * t + 25.0_f64).sqrt();
        assert!((p_value(r, 27).unwrap() - 0.05).abs() < 1e-9);
    }

    #[test]
    fn planted_rake_dependence() {
        let g = build_grid(&center(), &Deltas::default()).unwrap();
        let results: Vec<RunResult> = g
            .mechanisms()
            .unwrap()
            .into_iter()
            .map(|fm| planted(fm, 0.05 * fm.rake() - 1.0))
            .collect();
        let t = correlation_table(&results, Component::Ud);
        for m in Metric::all() {
            let Cell::Defined { r, p } = t.cell(Param::Rake, m) else { panic!() };
            assert!((r - 1.0).abs() < 1e-12 && p < 0.05);
            for q in [Param::Strike, Param::Dip] {
                let Cell::Defined { r, p } = t.cell(q, m) else { panic!() };
                assert!(r.abs() < 1e-9);
                assert!(p > 0.05);
            }
        }
        let masked = t.significant(0.05);
        assert_eq!(masked.cell(Param::Strike, Metric::Eg), Cell::Blank);
        assert!(matches!(masked.cell(Param::Rake, Metric::Eg), Cell::Defined { .. }));
        let csv = t.to_csv(0.05).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "parameter,metric,n,r,p,r_significant");
        let strike_eg = lines.next().unwrap();
        assert!(strike_eg.starts_with("strike,EG,27,"));
        assert!(strike_eg.ends_with(','), "{strike_eg}");
    }

    #[test]
    fn constant_metric_is_undefined() {
        let g = build_grid(&center(), &Deltas::default()).unwrap();
        let results: Vec<RunResult> =
            g.mechanisms().unwrap().into_iter().map(|fm| planted(fm, 7.0)).collect();
        let t = correlation_table(&results, Component::Ew);
        assert!(t.cells.iter().flatten().all(|c| *c == Cell::Undefined));
        assert_eq!(t.significant(0.05).cells, t.cells);
        let one = correlation_table(&results[..1], Component::Ew);
        assert!(one.cells.iter().flatten().all(|c| *c == Cell::Undefined));
    }

    #[test]
    fn independent_normals_rarely_correlate() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let trials = 2000;
        let mut big = 0;
        for _ in 0..trials {
            let x: Vec<f64> = (0..27).map(|_| StandardNormal.sample(&mut rng)).collect();
            let y: Vec<f64> = (0..27).map(|_| StandardNormal.sample(&mut rng)).collect();
            if pearson(&x, &y).unwrap().abs() >= 0.5 {
                big += 1;
            }
        }
        assert!((big as f64) / (trials as f64) <= 0.01, "{big}");
    }

    #[test]
    fn p_value_matches_permutation_test() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 27;
        for &target in &[0.15, 0.35, 0.55] {
            let x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let e: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let y: Vec<f64> = x.iter().zip(&e).map(|(a, b)| target * a + b).collect();
            let r = pearson(&x, &y).unwrap();
            if r.abs() > 0.6 {
                continue;
            }
            let mut ys = y.clone();
            let shuffles = 20_000;
            let mut hits = 0;
            for _ in 0..shuffles {
                ys.shuffle(&mut rng);
                if pearson(&x, &ys).unwrap().abs() >= r.abs() {
                    hits += 1;
                }
            }
            let perm = hits as f64 / shuffles as f64;
            let p = p_value(r, n).unwrap();
            assert!((perm - p).abs() < 0.02, "r={r}: perm {perm} vs t {p}");
        }
    }

    #[test]
    fn grouping_layout() {
        let g = build_grid(&center(), &Deltas::default()).unwrap();
        let mut results: Vec<RunResult> = g
            .mechanisms()
            .unwrap()
            .into_iter()
            .map(|fm| planted(fm, fm.dip() / 10.0))
            .collect();
        results.reverse();
        let rows = group_report(&results);
        assert_eq!(rows.len(), 3 * 3 * 27 * 12);
        let dip50: Vec<_> = rows
            .iter()
            .filter(|r| r.component == Component::Ew && r.parameter == Param::Dip && r.value == 50.0)
            .collect();
        assert_eq!(dip50.len(), 9 * 12);
        assert!(dip50.iter().all(|r| r.quality == QualityLevel::Fair && r.score == 5.0));
        assert_eq!(distinct_values(&results, Param::Rake), 3);
        let csv = group_csv(&rows).unwrap();
        assert_eq!(
            csv.lines().next().unwrap(),
            "component,parameter,value,strike,dip,rake,metric,score,quality"
        );
        assert_eq!(csv.lines().nth(1).unwrap(), "ew,strike,40.0,40.0,50.0,80.0,EG,5.0,fair");
    }

    #[test]
    fn correlation_row_round_trip() {
        let csv = "parameter,metric,n,r,p,r_significant\nrake,C*,27,0.5,0.01,0.5\ndip,PG,27,,,\n";
        let mut rd = csv::Reader::from_reader(csv.as_bytes());
        let rows: Vec<CorrelationRow> = rd.deserialize().map(|r| r.unwrap()).collect();
        assert_eq!(rows[0].metric, Metric::Im(Im::CStar));
        assert_eq!(rows[1].r, None);
        assert_eq!(rows[1].parameter, Param::Dip);
    }
}
