//! Run configuration: a single JSON file plus two environment overrides.
//!
//! Every field is optional in the file; missing fields take the defaults
//! below. Relative paths are resolved against the directory holding the
//! configuration file.
//!
//! ```json
//! {
//!   "scenario": "scenario.json",
//!   "crustal_model": null,
//!   "reference": null,
//!   "reference_mechanism": null,
//!   "deltas": { "strike": 5, "dip": 5, "rake": 10 },
//!   "gof": { "anderson": { "bands": [[0.05, 0.1], [0.1, 0.25]] }, "tf": { "n_freqs": 40 } },
//!   "alpha": 0.05,
//!   "workers": 4,
//!   "out_dir": "out"
//! }
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::earthmodel::CrustalModel;
use crate::ensemble::Deltas;
use crate::error::{Error, Result};
use crate::gof::GofConfig;
use crate::source::{FocalMechanism, Medium, ScenarioFile};

pub const ENV_WORKERS: &str = "GMSENS_WORKERS";
pub const ENV_OUT: &str = "GMSENS_OUT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Scenario JSON; the built-in scenario when absent.
    pub scenario: Option<PathBuf>,
    /// Layered model; when given, the medium is the layer at source depth.
    pub crustal_model: Option<PathBuf>,
    /// Recorded trace that sweeps are scored against.
    pub reference: Option<PathBuf>,
    /// Mechanism synthesised as the reference when no recording is given;
    /// defaults to the scenario mechanism.
    pub reference_mechanism: Option<FocalMechanism>,
    pub deltas: Deltas,
    pub gof: GofConfig,
    pub alpha: f64,
    pub workers: usize,
    pub out_dir: PathBuf,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            scenario: None,
            crustal_model: None,
            reference: None,
            reference_mechanism: None,
            deltas: Deltas::default(),
            gof: GofConfig::default(),
            alpha: 0.05,
            workers: 4,
            out_dir: PathBuf::from("out"),
        }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg: Config =
            serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.scenario, &mut cfg.crustal_model, &mut cfg.reference]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if cfg.out_dir.is_relative() {
            cfg.out_dir = base.join(&cfg.out_dir);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies `GMSENS_WORKERS` and `GMSENS_OUT` when set.
    pub fn apply_env(&mut self) -> Result<()> {
        if let Ok(w) = std::env::var(ENV_WORKERS) {
            self.workers = w
                .trim()
                .parse()
                .map_err(|_| invalid(format!("{ENV_WORKERS} must be a positive integer, got {w:?}")))?;
        }
        if let Ok(o) = std::env::var(ENV_OUT) {
            if !o.is_empty() {
                self.out_dir = PathBuf::from(o);
            }
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        for p in [&self.scenario, &self.crustal_model, &self.reference]
            .into_iter()
            .flatten()
        {
            if !p.is_file() {
                return Err(invalid(format!("file not found: {}", p.display())));
            }
        }
        if self.workers == 0 {
            return Err(invalid("workers must be >= 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(invalid(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        let a = &self.gof.anderson;
        if a.filter_order == 0 {
            return Err(invalid("filter_order must be >= 1"));
        }
        if !(0.0..=0.5).contains(&a.taper_fraction) || !(0.0..=0.5).contains(&self.gof.tf.taper_fraction) {
            return Err(invalid("taper fractions must lie in [0, 0.5]"));
        }
        if !(a.max_lag >= 0.0) {
            return Err(invalid("max_lag must be >= 0"));
        }
        let im = &a.im;
        if !(0.0..1.0).contains(&im.damping) {
            return Err(invalid(format!("damping must lie in [0, 1), got {}", im.damping)));
        }
        for (name, (lo, hi)) in [
            ("arias_thresholds", im.arias_thresholds),
            ("energy_thresholds", im.energy_thresholds),
        ] {
            if !(0.0 <= lo && lo < hi && hi <= 1.0) {
                return Err(invalid(format!("{name} must satisfy 0 <= lo < hi <= 1")));
            }
        }
        if im.periods.is_empty() || im.periods.iter().any(|p| !(*p > 0.0)) {
            return Err(invalid("periods must be a non-empty list of positive values"));
        }
        if !(im.fs_smoothing_octaves >= 0.0) {
            return Err(invalid("fs_smoothing_octaves must be >= 0"));
        }
        let tf = &self.gof.tf;
        if !(tf.omega0 > 0.0) {
            return Err(invalid("omega0 must be > 0"));
        }
        if !(tf.f_min > 0.0 && tf.f_min < tf.f_max) || tf.n_freqs < 2 {
            return Err(invalid("need 0 < f_min < f_max and n_freqs >= 2"));
        }
        if !(tf.mapping.a > 0.0 && tf.mapping.k > 0.0) {
            return Err(invalid("GOF mapping constants must be > 0"));
        }
        Ok(())
    }

    /// Scenario after applying the crustal model, if any.
    pub fn scenario_file(&self) -> Result<ScenarioFile> {
        let mut sc = match &self.scenario {
            Some(p) => ScenarioFile::from_json_file(p)?,
            None => ScenarioFile::default(),
        };
        if let Some(p) = &self.crustal_model {
            let model = CrustalModel::from_json_file(p)?;
            sc.scenario.medium = Medium::from(model.layer_at(sc.scenario.hypocenter.z)?);
        }
        sc.scenario.validate(sc.rise_time)?;
        Ok(sc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        Config::default().validate().unwrap();
        let json = serde_json::to_string(&Config::default()).unwrap();
        let back: Config = serde_json::from_str(&json).unwrap();
        assert_eq!(back, Config::default());
    }

    #[test]
    fn load_resolves_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        let sc = serde_json::to_string(&ScenarioFile::default()).unwrap();
        std::fs::write(dir.path().join("sc.json"), sc).unwrap();
        let cfg_path = dir.path().join("cfg.json");
        std::fs::write(&cfg_path, r#"{"scenario": "sc.json", "workers": 2}"#).unwrap();
        let cfg = Config::load(&cfg_path).unwrap();
        assert_eq!(cfg.scenario.as_deref(), Some(dir.path().join("sc.json").as_path()));
        assert_eq!(cfg.out_dir, dir.path().join("out"));
        assert_eq!(cfg.workers, 2);
        assert_eq!(cfg.scenario_file().unwrap(), ScenarioFile::default());
    }

    #[test]
    fn rejects_bad_values() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        for body in [
            r#"{"workers": 0}"#,
            r#"{"alpha": 1.5}"#,
            r#"{"scenario": "missing.json"}"#,
            r#"{"gof": {"anderson": {"im": {"damping": 1.2}}}}"#,
            r#"{"gof": {"anderson": {"bands": [[2.0, 1.0]]}}}"#,
            r#"{"gof": {"tf": {"f_min": 20.0}}}"#,
            r#"{"unknown_key": 1}"#,
            r#"{"deltas": {"strike": 5}}"#,
        ] {
            std::fs::write(&p, body).unwrap();
            assert!(Config::load(&p).is_err(), "{body}");
        }
    }

    #[test]
    fn layered_medium() {
        let dir = tempfile::tempdir().unwrap();
        let model = serde_json::to_string(&CrustalModel::default()).unwrap();
        std::fs::write(dir.path().join("m.json"), model).unwrap();
        let cfg = Config {
            crustal_model: Some(dir.path().join("m.json")),
            ..Config::default()
        };
        let sc = cfg.scenario_file().unwrap();
        let layer = *CrustalModel::default().layer_at(1000.0).unwrap();
        assert_eq!(sc.scenario.medium, Medium::from(&layer));
    }
}
