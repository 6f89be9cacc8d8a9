//! Three-component trace files.
//!
//! A trace is a CSV file with the header `t,ew,ns,ud` followed by one row per
//! sample (time in seconds, then the three component values). Sampling must be
//! uniform to within 1e-9 s. A JSON sidecar with the same basename and the
//! extension `.meta.json` carries the station id, units and epicentral
//! distance; when it is missing the record is read as acceleration from an
//! unnamed station.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{Record3C, TimeSeries, Unit};

pub const TRACE_HEADER: &str = "t,ew,ns,ud";
const JITTER_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub station_id: String,
    pub units: Unit,
    pub epicentral_distance: Option<f64>,
}

/// `dir/name.csv` -> `dir/name.meta.json`
pub fn sidecar_path(trace: &Path) -> PathBuf {
    let stem = trace
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    trace.with_file_name(format!("{stem}.meta.json"))
}

pub fn format_trace_csv(rec: &Record3C) -> String {
    let mut out = String::with_capacity(rec.len() * 64);
    out.push_str(TRACE_HEADER);
    out.push('\n');
    let (ew, ns, ud) = (rec.ew.samples(), rec.ns.samples(), rec.ud.samples());
    for i in 0..rec.len() {
        let _ = writeln!(out, "{},{},{},{}", rec.ew.time(i), ew[i], ns[i], ud[i]);
    }
    out
}

pub fn write_trace(path: &Path, rec: &Record3C) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, format_trace_csv(rec))?;
    let meta = TraceMeta {
        station_id: rec.station_id.clone(),
        units: rec.unit(),
        epicentral_distance: rec.epicentral_distance,
    };
    fs::write(sidecar_path(path), serde_json::to_string_pretty(&meta)? + "\n")?;
    Ok(())
}

pub fn parse_trace_csv(path: &Path, text: &str, meta: &TraceMeta) -> Result<Record3C> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == TRACE_HEADER => {}
        Some((_, h)) => {
            return Err(Error::format(
                path,
                format!("expected header `{TRACE_HEADER}`, found `{}`", h.trim()),
            ))
        }
        None => return Err(Error::format(path, "empty trace file")),
    }

    let mut t = Vec::new();
    let mut cols: [Vec<f64>; 3] = Default::default();
    for (lineno, line) in lines {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(Error::format(
                path,
                format!("line {}: expected 4 fields, found {}", lineno + 1, fields.len()),
            ));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|e| {
                Error::format(path, format!("line {}: bad number `{s}`: {e}", lineno + 1))
            })
        };
        t.push(parse(fields[0])?);
        for (c, f) in cols.iter_mut().zip(&fields[1..]) {
            c.push(parse(f)?);
        }
    }
    if t.len() < 2 {
        return Err(Error::format(path, "trace needs at least two samples"));
    }
    let n = t.len();
    let dt = (t[n - 1] - t[0]) / (n - 1) as f64;
    if !(dt > 0.0) {
        return Err(Error::format(path, "time column must increase"));
    }
    for (i, ti) in t.iter().enumerate() {
        if (ti - (t[0] + dt * i as f64)).abs() > JITTER_TOLERANCE {
            return Err(Error::format(
                path,
                format!("non-uniform sampling at row {} (t = {ti})", i + 1),
            ));
        }
    }
    let [ew, ns, ud] = cols;
    let mk = |samples: Vec<f64>, label: &str| {
        TimeSeries::new(dt, t[0], samples, meta.units, label)
            .map_err(|e| Error::format(path, e.to_string()))
    };
    Record3C::new(
        mk(ew, "EW")?,
        mk(ns, "NS")?,
        mk(ud, "UD")?,
        meta.station_id.clone(),
        meta.epicentral_distance,
    )
}

pub fn read_trace(path: &Path) -> Result<Record3C> {
    let text = fs::read_to_string(path)?;
    let side = sidecar_path(path);
    let meta = if side.exists() {
        let raw = fs::read_to_string(&side)?;
        serde_json::from_str(&raw).map_err(|e| Error::format(&side, e.to_string()))?
    } else {
        TraceMeta {
            station_id: "UNKNOWN".into(),
            units: Unit::Acceleration,
            epicentral_distance: None,
        }
    };
    parse_trace_csv(path, &text, &meta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record() -> Record3C {
        let mk = |f: f64, label: &str| {
            let x = (0..50).map(|i| (i as f64 * f).sin() * 1e-3).collect();
            TimeSeries::new(0.005, 0.0, x, Unit::Acceleration, label).unwrap()
        };
        Record3C::new(mk(0.1, "EW"), mk(0.2, "NS"), mk(0.3, "UD"), "STA01", Some(15_000.0))
            .unwrap()
    }

    #[test]
    fn write_read_preserves_samples_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rec.csv");
        let rec = record();
        write_trace(&path, &rec).unwrap();
        assert!(dir.path().join("rec.meta.json").exists());
        let back = read_trace(&path).unwrap();
        assert_eq!(back.ew.samples(), rec.ew.samples());
        assert_eq!(back.ud.samples(), rec.ud.samples());
        assert_eq!(back.station_id, "STA01");
        assert_eq!(back.epicentral_distance, Some(15_000.0));
        assert!((back.dt() - 0.005).abs() < 1e-15);
    }

    #[test]
    fn header_is_exact() {
        let text = format_trace_csv(&record());
        assert!(text.starts_with("t,ew,ns,ud\n"));
        assert_eq!(text.lines().count(), 51);
    }

    #[test]
    fn rejects_jitter_and_bad_header() {
        let meta = TraceMeta {
            station_id: "S".into(),
            units: Unit::Acceleration,
            epicentral_distance: None,
        };
        let p = Path::new("x.csv");
        let bad = "t,ew,ns,ud\n0,1,1,1\n0.01,1,1,1\n0.0205,1,1,1\n0.03,1,1,1\n";
        assert!(matches!(parse_trace_csv(p, bad, &meta), Err(Error::Format { .. })));
        let hdr = "time,e,n,z\n0,1,1,1\n0.01,1,1,1\n";
        assert!(parse_trace_csv(p, hdr, &meta).is_err());
        let ok = "t,ew,ns,ud\n0,1,1,1\n0.01,1,1,1\n0.0200000000001,1,1,1\n";
        assert!(parse_trace_csv(p, ok, &meta).is_ok());
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(
            sidecar_path(Path::new("/a/b/synthetic.csv")),
            PathBuf::from("/a/b/synthetic.meta.json")
        );
    }
}
