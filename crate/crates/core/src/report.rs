//! Result rows, the stable CSV schema, reference-error metrics and run
//! manifests.

use serde::{Deserialize, Serialize};

use crate::error::{EngineError, Result};

pub const CSV_SCHEMA_VERSION: u32 = 1;
pub const CSV_HEADER: &str = "t,level,pfe,ee,dEE_dxd,dEE_dxf,dEE_dX,cpu_seconds,method";

/// One result row: metrics at one exposure date (and netting set, when
/// reporting at netting level). Unset metrics serialize as empty fields.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskRow {
    pub t: f64,
    pub level: String,
    pub pfe: Option<f64>,
    pub ee: Option<f64>,
    pub sens: Option<[f64; 3]>,
    pub cpu_seconds: f64,
    pub method: String,
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.17e}"),
        None => String::new(),
    }
}

pub fn rows_to_csv(rows: &[RiskRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let (s0, s1, s2) = match r.sens {
            Some(s) => (Some(s[0]), Some(s[1]), Some(s[2])),
            None => (None, None, None),
        };
        out.push_str(&format!(
            "{:.12},{},{},{},{},{},{},{:.6},{}\n",
            r.t,
            r.level,
            fmt_opt(r.pfe),
            fmt_opt(r.ee),
            fmt_opt(s0),
            fmt_opt(s1),
            fmt_opt(s2),
            r.cpu_seconds,
            r.method
        ));
    }
    out
}

fn parse_opt(field: &str, line_no: usize, origin: &str) -> Result<Option<f64>> {
    if field.is_empty() {
        return Ok(None);
    }
    field
        .parse::<f64>()
        .map(Some)
        .map_err(|e| EngineError::Parse {
            path: origin.to_string(),
            msg: format!("line {line_no}: bad number {field:?}: {e}"),
        })
}

pub fn rows_from_csv(text: &str, origin: &str) -> Result<Vec<RiskRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == CSV_HEADER => {}
        _ => {
            return Err(EngineError::Parse {
                path: origin.to_string(),
                msg: format!("line 1: expected header {CSV_HEADER:?}"),
            })
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(EngineError::Parse {
                path: origin.to_string(),
                msg: format!("line {line_no}: expected 9 fields, got {}", fields.len()),
            });
        }
        let t = fields[0].parse::<f64>().map_err(|e| EngineError::Parse {
            path: origin.to_string(),
            msg: format!("line {line_no}: bad t: {e}"),
        })?;
        let pfe = parse_opt(fields[2], line_no, origin)?;
        let ee = parse_opt(fields[3], line_no, origin)?;
        let s0 = parse_opt(fields[4], line_no, origin)?;
        let s1 = parse_opt(fields[5], line_no, origin)?;
        let s2 = parse_opt(fields[6], line_no, origin)?;
        let sens = match (s0, s1, s2) {
            (Some(a), Some(b), Some(c)) => Some([a, b, c]),
            (None, None, None) => None,
            _ => {
                return Err(EngineError::Parse {
                    path: origin.to_string(),
                    msg: format!("line {line_no}: partial sensitivity triple"),
                })
            }
        };
        rows.push(RiskRow {
            t,
            level: fields[1].to_string(),
            pfe,
            ee,
            sens,
            cpu_seconds: fields[7].parse().unwrap_or(0.0),
            method: fields[8].to_string(),
        });
    }
    Ok(rows)
}

/// Which column a reference comparison reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Pfe,
    Ee,
}

fn metric_of(row: &RiskRow, metric: Metric) -> Option<f64> {
    match metric {
        Metric::Pfe => row.pfe,
        Metric::Ee => row.ee,
    }
}

/// Time-averaged absolute difference against reference rows, expressed as
/// a percentage of the total notional. Rows are matched by (t, level).
pub fn time_averaged_error_pct(
    rows: &[RiskRow],
    reference: &[RiskRow],
    metric: Metric,
    total_notional: f64,
) -> Result<f64> {
    if !(total_notional > 0.0) {
        return Err(EngineError::InvalidParameter(
            "total notional must be positive for the error metric".into(),
        ));
    }
    let mut sum = 0.0;
    let mut n = 0usize;
    for row in rows {
        let Some(v) = metric_of(row, metric) else {
            continue;
        };
        let matched = reference.iter().find(|r| {
            (r.t - row.t).abs() < 1e-9 && r.level == row.level && metric_of(r, metric).is_some()
        });
        if let Some(r) = matched {
            sum += (v - metric_of(r, metric).expect("matched")).abs();
            n += 1;
        }
    }
    if n == 0 {
        return Err(EngineError::InvalidParameter(
            "no overlapping rows between results and reference".into(),
        ));
    }
    Ok(sum / n as f64 / total_notional * 100.0)
}

/// A full engine run: per-date rows plus the settings snapshot and the
/// clamp diagnostics that accumulated while producing them.
#[derive(Debug, Clone)]
pub struct RiskReport {
    pub rows: Vec<RiskRow>,
    /// Settings snapshot of the run (engine settings or MC config).
    pub settings: serde_json::Value,
    /// Largest [0,1]-clamp applied to a recovered CDF; clamping beyond
    /// 1e-6 deserves a warning, never silence.
    pub max_cdf_excursion: f64,
    /// Largest negative expected-exposure value zeroed by the closed
    /// form.
    pub max_ee_clamp: f64,
}

/// FNV-1a, used to fingerprint input files in manifests.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Fingerprint of one input file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputDigest {
    pub role: String,
    pub path: String,
    pub bytes: usize,
    pub fnv1a64: String,
}

impl InputDigest {
    pub fn from_file(role: &str, path: &std::path::Path) -> Result<Self> {
        let data = std::fs::read(path)?;
        Ok(InputDigest {
            role: role.to_string(),
            path: path.display().to_string(),
            bytes: data.len(),
            fnv1a64: format!("{:016x}", fnv1a64(&data)),
        })
    }
}

/// Everything that determines a run's results. Two runs with equal
/// identity sections produce equal result files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestIdentity {
    pub command: String,
    pub argv: Vec<String>,
    pub settings: serde_json::Value,
    pub inputs: Vec<InputDigest>,
    pub csv_schema_version: u32,
    pub artifact_version: String,
}

/// Observed execution facts; not part of the identity contract.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestRun {
    pub wall_seconds: f64,
    /// Compute time only; file I/O excluded.
    pub cpu_compute_seconds: f64,
    pub threads: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub identity: ManifestIdentity,
    pub run: ManifestRun,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serialization cannot fail")
    }
}
