//! The four pipeline commands behind the `gmsens` binary.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::anderson::{scores_csv, QualityLevel};
use crate::config::Config;
use crate::ensemble::{
    build_grid, correlation_tables, distinct_values, group_csv, group_report, run_label,
    run_sweep, CorrelationRow, GroupRow, Param, RunFailure, RunResult, SweepGrid,
};
use crate::error::{Error, Result};
use crate::gof::{evaluate_pair, PairGof};
use crate::report::{grouped_svg, heatmap_svg};
use crate::signal::{differentiate, Component, Record3C, Unit};
use crate::source::{synth_fullspace, FocalMechanism, ScenarioFile};
use crate::traceio::{read_trace, write_trace};

pub const SYNTHETIC_FILE: &str = "synthetic.csv";
pub const GOF_FILE: &str = "gof.json";
pub const GROUPED_FILE: &str = "grouped_scores.csv";
pub const SWEEP_FILE: &str = "sweep.json";
pub const MANIFEST_FILE: &str = "manifest.json";

pub fn correlations_file(c: Component) -> String {
    format!("correlations_{}.csv", c.name())
}

fn components(only: Option<Component>) -> Vec<Component> {
    match only {
        Some(c) => vec![c],
        None => Component::ALL.to_vec(),
    }
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, contents)?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write(path, serde_json::to_string_pretty(value)? + "\n")
}

/// Brings velocity or displacement records to acceleration.
pub fn to_acceleration(rec: &Record3C) -> Result<Record3C> {
    let mut r = rec.clone();
    while r.unit() != Unit::Acceleration {
        r = r.map(differentiate)?;
    }
    Ok(r)
}

fn synthesize(sc: &ScenarioFile, fm: &FocalMechanism) -> Result<Record3C> {
    let stf = sc.source_time_function()?;
    synth_fullspace(&sc.scenario, fm, &stf)
}

/// Synthesises the scenario mechanism and writes `synthetic.csv` into `out`.
pub fn cmd_synth(cfg: &Config, out: &Path) -> Result<PathBuf> {
    let sc = cfg.scenario_file()?;
    let rec = synthesize(&sc, &sc.mechanism)?;
    let path = out.join(SYNTHETIC_FILE);
    write_trace(&path, &rec)?;
    Ok(path)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    pub record: String,
    pub synthetic: String,
    pub components: Vec<Component>,
    pub worst_quality: QualityLevel,
    pub scores: PairGof,
}

/// Scores `synthetic` against `record` with both frameworks. Writes
/// `gof.json`, `anderson_scores.csv` and the TF maps per component.
pub fn cmd_gof(
    record: &Path,
    synthetic: &Path,
    cfg: &Config,
    out: &Path,
    only: Option<Component>,
) -> Result<GofReport> {
    let rec = to_acceleration(&read_trace(record)?)?;
    let sim = to_acceleration(&read_trace(synthetic)?)?;
    let (scores, maps) = evaluate_pair(&rec, &sim, &cfg.gof)?;
    let comps = components(only);
    for &c in &comps {
        let m = maps.get(c);
        write(&out.join(format!("tfeg_{}.csv", c.name())), m.tfeg.to_csv())?;
        write(&out.join(format!("tfpg_{}.csv", c.name())), m.tfpg.to_csv())?;
    }
    write(&out.join("anderson_scores.csv"), scores_csv(&scores.anderson, only))?;
    let report = GofReport {
        record: record.display().to_string(),
        synthetic: synthetic.display().to_string(),
        components: comps,
        worst_quality: scores.worst_quality(),
        scores,
    };
    write_json(&out.join(GOF_FILE), &report)?;
    Ok(report)
}

/// Metadata written next to the sweep tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub grid: SweepGrid,
    pub runs: usize,
    pub completed: usize,
    pub failures: Vec<RunFailure>,
    pub reference: String,
    pub alpha: f64,
    pub correlation_basis: String,
    pub metric_basis: String,
    pub qualitative_trends: bool,
    pub components: Vec<Component>,
}

impl SweepSummary {
    pub fn is_partial(&self) -> bool {
        !self.failures.is_empty()
    }
}

/// Reads `<dir>/<label>/synthetic.csv`, falling back to `<dir>/<label>.csv`.
fn external_trace(dir: &Path, fm: &FocalMechanism) -> Result<Record3C> {
    let label = run_label(fm);
    let nested = dir.join(&label).join(SYNTHETIC_FILE);
    let flat = dir.join(format!("{label}.csv"));
    let path = if nested.is_file() { nested } else { flat };
    if !path.is_file() {
        return Err(Error::InvalidParameter(format!(
            "no external waveform for run {label} in {}",
            dir.display()
        )));
    }
    to_acceleration(&read_trace(&path)?)
}

/// Full sweep: one run per grid mechanism, per-run outputs under
/// `runs/<strike>_<dip>_<rake>/`, correlation and grouped tables, and the
/// figures. The returned summary flags partial sweeps.
pub fn cmd_sweep(
    cfg: &Config,
    out: &Path,
    external_runs: Option<&Path>,
    only: Option<Component>,
) -> Result<SweepSummary> {
    let sc = cfg.scenario_file()?;
    let grid = build_grid(&sc.mechanism, &cfg.deltas)?;
    let (reference, reference_label) = match &cfg.reference {
        Some(p) => (to_acceleration(&read_trace(p)?)?, p.display().to_string()),
        None => {
            let fm = cfg.reference_mechanism.unwrap_or(sc.mechanism);
            (
                synthesize(&sc, &fm)?,
                format!("synthetic, mechanism {}", run_label(&fm)),
            )
        }
    };
    if let Some(dir) = external_runs {
        if !dir.is_dir() {
            return Err(Error::InvalidParameter(format!(
                "external runs directory not found: {}",
                dir.display()
            )));
        }
    }
    let sweep = run_sweep(&grid, &reference, &cfg.gof, cfg.workers, |fm| match external_runs {
        Some(dir) => external_trace(dir, fm),
        None => synthesize(&sc, fm),
    })?;

    for run in &sweep.runs {
        let dir = out.join("runs").join(run_label(&run.result.mechanism));
        write_trace(&dir.join(SYNTHETIC_FILE), &run.trace)?;
        write_json(&dir.join(GOF_FILE), &run.result)?;
    }
    let results = sweep.results();
    let comps = components(only);
    let tables = correlation_tables(&results);
    for &c in &comps {
        write(&out.join(correlations_file(c)), tables.get(c).to_csv(cfg.alpha)?)?;
    }
    let rows: Vec<GroupRow> = group_report(&results)
        .into_iter()
        .filter(|r| comps.contains(&r.component))
        .collect();
    write(&out.join(GROUPED_FILE), group_csv(&rows)?)?;

    let summary = SweepSummary {
        grid,
        runs: sweep.runs.len() + sweep.failures.len(),
        completed: sweep.runs.len(),
        failures: sweep.failures.clone(),
        reference: reference_label,
        alpha: cfg.alpha,
        correlation_basis: "pearson r over all completed runs (parameter value vs metric)".into(),
        metric_basis: "EG, PG and the mean over bands of each intensity-measure score".into(),
        qualitative_trends: qualitative(&results),
        components: comps,
    };
    write_json(&out.join(SWEEP_FILE), &summary)?;
    cmd_report(out, out)?;
    Ok(summary)
}

fn qualitative(results: &[RunResult]) -> bool {
    Param::ALL.iter().any(|&p| distinct_values(results, p) <= 3)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    /// Seconds since the Unix epoch; the only non-reproducible field.
    pub generated_at: u64,
    pub run_dir: String,
    pub qualitative_trends: bool,
    pub files: Vec<ManifestEntry>,
}

fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut rd = csv::Reader::from_path(path)
        .map_err(|e| Error::format(path, e.to_string()))?;
    rd.deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(|e| Error::format(path, e.to_string()))
}

/// Renders the figures for a sweep directory into `out` and writes the
/// manifest. Components without a correlation table are skipped.
pub fn cmd_report(run_dir: &Path, out: &Path) -> Result<Manifest> {
    let grouped_path = run_dir.join(GROUPED_FILE);
    if !grouped_path.is_file() {
        return Err(Error::InvalidParameter(format!(
            "{} not found; is this a sweep directory?",
            grouped_path.display()
        )));
    }
    let grouped: Vec<GroupRow> = read_csv(&grouped_path)?;
    let qualitative = Param::ALL.iter().any(|&p| {
        let mut v: Vec<f64> = grouped
            .iter()
            .filter(|r| r.parameter == p)
            .map(|r| r.value)
            .collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v.len() <= 3
    });

    let mut written = Vec::new();
    for c in Component::ALL {
        let corr_path = run_dir.join(correlations_file(c));
        if !corr_path.is_file() {
            continue;
        }
        let rows: Vec<CorrelationRow> = read_csv(&corr_path)?;
        let name = format!("heatmap_{}.svg", c.name());
        write(&out.join(&name), heatmap_svg(c, &rows, qualitative))?;
        written.push(name);
        if grouped.iter().any(|r| r.component == c) {
            let name = format!("grouped_{}.svg", c.name());
            write(&out.join(&name), grouped_svg(c, &grouped))?;
            written.push(name);
        }
    }
    let files = written
        .into_iter()
        .map(|p| {
            let bytes = fs::metadata(out.join(&p))?.len();
            Ok(ManifestEntry { path: p, bytes })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = Manifest {
        generated_at: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        run_dir: run_dir.display().to_string(),
        qualitative_trends: qualitative,
        files,
    };
    write_json(&out.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn acceleration_passthrough_and_promotion() {
        let sc = ScenarioFile::default();
        let acc = synthesize(&sc, &sc.mechanism).unwrap();
        assert_eq!(to_acceleration(&acc).unwrap(), acc);
        let vel = acc.map(crate::signal::integrate).unwrap();
        let back = to_acceleration(&vel).unwrap();
        assert_eq!(back.unit(), Unit::Acceleration);
    }

    #[test]
    fn report_requires_sweep_dir() {
        let dir = tempfile::tempdir().unwrap();
        assert!(cmd_report(dir.path(), dir.path()).is_err());
    }
}
