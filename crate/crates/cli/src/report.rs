use std::collections::BTreeMap;
use std::io::Write;

use cr3kit::Point;
use serde::Serialize;

pub const SCHEMA: u32 = 1;

/// Tolerance for identities the jets satisfy exactly.
pub const TOL_EXACT: f64 = 1e-8;
/// Tolerance for quantities built from nested jets (`Φ`) or deformed charts.
pub const TOL_NESTED: f64 = 1e-6;
/// Tolerance for quadrature results.
pub const TOL_QUADRATURE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub max_defect: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_point: Option<Point>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// One defect measured at one sample.
#[derive(Debug, Clone)]
pub struct Sample {
    pub name: &'static str,
    pub tolerance: f64,
    pub point: Option<Point>,
    pub defect: Result<f64, String>,
}

impl Sample {
    pub fn new<E: std::fmt::Display>(
        name: &'static str,
        tolerance: f64,
        point: Option<Point>,
        defect: Result<f64, E>,
    ) -> Self {
        Self {
            name,
            tolerance,
            point,
            defect: defect.map_err(|e| e.to_string()),
        }
    }
}

/// Folds samples into one check per name, sorted by name. The first error
/// (in sample order) wins; otherwise the largest defect is kept.
pub fn reduce(samples: impl IntoIterator<Item = Sample>, tol_override: Option<f64>) -> Vec<Check> {
    let mut acc: BTreeMap<&'static str, Check> = BTreeMap::new();
    for s in samples {
        let tolerance = tol_override.unwrap_or(s.tolerance);
        let entry = acc.entry(s.name).or_insert_with(|| Check {
            name: s.name.to_string(),
            max_defect: Some(f64::NEG_INFINITY),
            tolerance,
            pass: true,
            worst_point: None,
            error: None,
        });
        if entry.error.is_some() {
            continue;
        }
        match s.defect {
            Ok(d) if d.is_finite() => {
                if entry.max_defect.is_some_and(|m| d > m) {
                    entry.max_defect = Some(d);
                    entry.worst_point = s.point;
                }
            }
            Ok(d) => {
                entry.max_defect = None;
                entry.worst_point = s.point;
                entry.error = Some(format!("non-finite defect {d}"));
            }
            Err(e) => {
                entry.max_defect = None;
                entry.worst_point = s.point;
                entry.error = Some(e);
            }
        }
    }
    acc.into_values()
        .map(|mut c| {
            c.pass = c.error.is_none() && c.max_defect.is_some_and(|d| d <= c.tolerance);
            c
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub schema: u32,
    pub model: String,
    pub suite: String,
    pub grid: usize,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

pub fn all_pass(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.pass)
}

pub fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)
}

/// CSV rendering of a float: shortest round-trip digits, exponent for tiny
/// or huge magnitudes, no negative zero.
pub fn csv_number(v: f64) -> String {
    format!("{:?}", v + 0.0)
}

pub fn write_checks_csv(out: &mut dyn Write, checks: &[Check]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["name", "max_defect", "tolerance", "pass", "error"])?;
    for c in checks {
        w.write_record([
            c.name.clone(),
            c.max_defect.map(csv_number).unwrap_or_default(),
            csv_number(c.tolerance),
            c.pass.to_string(),
            c.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()
}
