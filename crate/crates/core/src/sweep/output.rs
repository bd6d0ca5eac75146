//! CSV and JSON rendering of sweep tables, and the content-addressed cache.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::{run_sweep, SweepRow, SweepSpec, SweepTable};
use crate::error::{Error, Result};

/// Environment variable naming the sweep cache directory.
pub const CACHE_DIR_ENV: &str = "OPTOMECH_CACHE_DIR";

enum Cell {
    Num(f64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            // 17 significant digits round-trips every f64
            Cell::Num(v) => format!("{v:.16e}"),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) if v.is_finite() => json!(v),
            Cell::Num(_) | Cell::Empty => Value::Null,
            Cell::Bool(b) => json!(b),
            Cell::Text(s) => json!(s),
        }
    }
}

fn field_cell(row: &SweepRow, field: &str) -> Cell {
    if let Some(rep) = &row.report {
        match field {
            "stable" => return Cell::Bool(rep.stable),
            "tripartite_class" => {
                return rep
                    .tripartite_class
                    .map(|c| Cell::Text(c.as_str().to_string()))
                    .unwrap_or(Cell::Empty)
            }
            _ => {
                if let Some(v) = rep.numeric_field(field) {
                    return Cell::Num(v);
                }
            }
        }
    }
    match (&row.probe, field) {
        (Some(p), "probe_gain") => Cell::Num(p.probe_gain),
        (Some(p), "e_measured") => Cell::Num(p.e_measured),
        (Some(p), "e_inferred") => Cell::Num(p.e_inferred),
        (Some(p), "adiabatic_ok") => Cell::Bool(p.adiabatic_ok),
        (Some(p), "weak_probe_ok") => Cell::Bool(p.weak_probe_ok),
        _ => Cell::Empty,
    }
}

fn columns(table: &SweepTable) -> Vec<String> {
    let mut cols: Vec<String> = table.spec.axes.iter().map(|a| a.parameter.clone()).collect();
    cols.extend(table.spec.fields.iter().cloned());
    cols.push("error".to_string());
    cols
}

fn cells(table: &SweepTable, row: &SweepRow) -> Vec<Cell> {
    let mut out: Vec<Cell> = row.coords.iter().map(|v| Cell::Num(*v)).collect();
    out.extend(table.spec.fields.iter().map(|f| field_cell(row, f)));
    out.push(row.error.clone().map(Cell::Text).unwrap_or(Cell::Empty));
    out
}

pub fn to_csv(table: &SweepTable) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
    let fmt = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(columns(table)).map_err(fmt)?;
    for row in &table.rows {
        w.write_record(cells(table, row).iter().map(Cell::csv)).map_err(fmt)?;
    }
    w.into_inner().map_err(|e| Error::Format(e.to_string()))
}

pub fn to_json(table: &SweepTable) -> Result<Vec<u8>> {
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|r| Value::Array(cells(table, r).iter().map(Cell::json).collect()))
        .collect();
    let doc = json!({
        "name": table.spec.name,
        "columns": columns(table),
        "rows": rows,
    });
    let mut bytes = serde_json::to_vec_pretty(&doc).map_err(|e| Error::Format(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Hex SHA-256 of the canonical spec serialization and the crate version.
pub fn cache_key(spec: &SweepSpec) -> Result<String> {
    let canonical = serde_json::to_string(spec).map_err(|e| Error::Format(e.to_string()))?;
    let mut h = Sha256::new();
    h.update(canonical.as_bytes());
    h.update(b"\n");
    h.update(env!("CARGO_PKG_VERSION").as_bytes());
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

pub fn cache_dir_from_env() -> Option<PathBuf> {
    std::env::var_os(CACHE_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

#[derive(Debug, Clone)]
pub struct CachedSweep {
    pub key: String,
    pub csv: Vec<u8>,
    pub json: Vec<u8>,
    pub hit: bool,
    /// Point computations performed by this call (0 on a cache hit).
    pub evaluations: usize,
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Runs `spec`, or returns the stored bytes when `cache_dir` already holds
/// a result for the same spec and code version.
pub fn run_cached(spec: &SweepSpec, cache_dir: Option<&Path>) -> Result<CachedSweep> {
    spec.validate()?;
    let key = cache_key(spec)?;
    if let Some(dir) = cache_dir {
        let csv_path = dir.join(format!("{key}.csv"));
        let json_path = dir.join(format!("{key}.json"));
        if csv_path.is_file() && json_path.is_file() {
            return Ok(CachedSweep {
                key,
                csv: fs::read(csv_path)?,
                json: fs::read(json_path)?,
                hit: true,
                evaluations: 0,
            });
        }
    }
    let run = run_sweep(spec)?;
    let csv = to_csv(&run.table)?;
    let json = to_json(&run.table)?;
    if let Some(dir) = cache_dir {
        fs::create_dir_all(dir)?;
        write_atomic(&dir.join(format!("{key}.csv")), &csv)?;
        write_atomic(&dir.join(format!("{key}.json")), &json)?;
    }
    Ok(CachedSweep {
        key,
        csv,
        json,
        hit: false,
        evaluations: run.evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::SystemParams;
    use crate::sweep::{preset, Axis};

    fn small() -> SweepSpec {
        SweepSpec::new(
            "small",
            SystemParams::reference(),
            vec![Axis::log("temperature", 1e-6, 1e-3, 4)],
        )
    }

    #[test]
    fn csv_layout_and_precision() {
        let run = run_sweep(&small()).unwrap();
        let text = String::from_utf8(to_csv(&run.table).unwrap()).unwrap();
        let mut lines = text.split("\r\n");
        let header = lines.next().unwrap();
        assert!(header.starts_with("temperature,stable,e_ac,"));
        assert!(header.ends_with(",error"));
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first[0], "9.9999999999999995e-7");
        assert_eq!(first[0].parse::<f64>().unwrap(), 1e-6);
        assert_eq!(first[1], "true");
        let e_ac: f64 = first[2].parse().unwrap();
        assert_eq!(e_ac, run.table.rows[0].report.as_ref().unwrap().e_ac.unwrap());
        assert_eq!(text.matches("\r\n").count(), 5);
    }

    #[test]
    fn error_text_is_quoted() {
        let spec = SweepSpec::new("e", SystemParams::reference(), vec![Axis::linear("temperature", -1.0, 1e-5, 2)]);
        let run = run_sweep(&spec).unwrap();
        let text = String::from_utf8(to_csv(&run.table).unwrap()).unwrap();
        let row = text.split("\r\n").nth(1).unwrap();
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(row.as_bytes());
        let rec = rdr.records().next().unwrap().unwrap();
        assert_eq!(rec.len(), 2 + spec.fields.len());
        assert!(rec[rec.len() - 1].contains("temperature"));
    }

    #[test]
    fn json_mirrors_csv() {
        let run = run_sweep(&small()).unwrap();
        let doc: Value = serde_json::from_slice(&to_json(&run.table).unwrap()).unwrap();
        assert_eq!(doc["name"], "small");
        assert_eq!(doc["rows"].as_array().unwrap().len(), 4);
        let e_ac = doc["rows"][0][2].as_f64().unwrap();
        assert_eq!(e_ac, run.table.rows[0].report.as_ref().unwrap().e_ac.unwrap());
    }

    #[test]
    fn cache_returns_identical_bytes_and_tracks_changes() {
        let dir = tempfile::tempdir().unwrap();
        let spec = small();
        let first = run_cached(&spec, Some(dir.path())).unwrap();
        assert!(!first.hit);
        assert_eq!(first.evaluations, 4);
        let second = run_cached(&spec, Some(dir.path())).unwrap();
        assert!(second.hit);
        assert_eq!(second.evaluations, 0);
        assert_eq!(first.csv, second.csv);
        assert_eq!(first.json, second.json);

        let mut changed = spec.clone();
        changed.base.finesse = 2e4;
        let third = run_cached(&changed, Some(dir.path())).unwrap();
        assert!(!third.hit);
        assert_ne!(third.key, first.key);
        assert_ne!(third.csv, first.csv);
    }

    #[test]
    fn uncached_runs_are_byte_identical() {
        let spec = preset("fig3a").unwrap();
        let a = run_cached(&spec, None).unwrap();
        let b = run_cached(&spec, None).unwrap();
        assert_eq!(a.csv, b.csv);
        assert_eq!(a.key, b.key);
    }
}
