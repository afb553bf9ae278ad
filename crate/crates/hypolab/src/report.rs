//! Structured results: per-check reports, experiment reports, and
//! tolerance-aware diffing between runs.
//!
//! Every numeric result carries its tolerance (when one applies) and its
//! provenance (`measured` from data, or `theory` from a formula), so two
//! reports can be compared without re-deriving what "close enough" means.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const REPORT_SCHEMA: &str = "hypolab.report.v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Estimated from samples, quadrature, or iteration.
    Measured,
    /// Evaluated from a closed-form expression.
    Theory,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Measurement {
    pub name: String,
    pub value: f64,
    /// Allowed absolute deviation when comparing across runs; `None` means
    /// the value must match bit-for-bit under an identical configuration.
    pub tolerance: Option<f64>,
    pub provenance: Provenance,
    /// Values that legitimately move under grid refinement; `compare`
    /// reports them as expected drift when resolutions differ.
    #[serde(default)]
    pub refinement_sensitive: bool,
}

impl Measurement {
    pub fn measured(name: &str, value: f64) -> Self {
        Measurement {
            name: name.into(),
            value,
            tolerance: None,
            provenance: Provenance::Measured,
            refinement_sensitive: false,
        }
    }

    pub fn theory(name: &str, value: f64) -> Self {
        Measurement {
            name: name.into(),
            value,
            tolerance: None,
            provenance: Provenance::Theory,
            refinement_sensitive: false,
        }
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = Some(tol);
        self
    }

    pub fn refinement_sensitive(mut self) -> Self {
        self.refinement_sensitive = true;
        self
    }
}

/// Serialized witness of a failed check (e.g. the violating vector).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FailureArtifact {
    pub label: String,
    pub data: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub pass: bool,
    #[serde(default)]
    pub context: BTreeMap<String, String>,
    #[serde(default)]
    pub measurements: Vec<Measurement>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<FailureArtifact>,
}

impl CheckReport {
    pub fn new(check: &str, pass: bool) -> Self {
        CheckReport {
            check: check.into(),
            pass,
            context: BTreeMap::new(),
            measurements: Vec::new(),
            failure: None,
        }
    }

    pub fn context(&mut self, key: &str, value: String) -> &mut Self {
        self.context.insert(key.into(), value);
        self
    }

    pub fn push(&mut self, m: Measurement) -> &mut Self {
        self.measurements.push(m);
        self
    }

    pub fn get(&self, name: &str) -> Option<&Measurement> {
        self.measurements.iter().find(|m| m.name == name)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema: String,
    pub artifact_version: String,
    pub kind: String,
    pub config_hash: String,
    pub seed: u64,
    /// Wall-clock bounds in seconds since the UNIX epoch.  Excluded from
    /// report comparison: everything else is deterministic given
    /// `(config, seed, version)`.
    pub started_unix_s: u64,
    pub finished_unix_s: u64,
    pub checks: Vec<CheckReport>,
    pub pass: bool,
}

impl ExperimentReport {
    pub fn new(kind: &str, config_hash: String, seed: u64) -> Self {
        ExperimentReport {
            schema: REPORT_SCHEMA.into(),
            artifact_version: env!("CARGO_PKG_VERSION").into(),
            kind: kind.into(),
            config_hash,
            seed,
            started_unix_s: unix_now(),
            finished_unix_s: 0,
            checks: Vec::new(),
            pass: true,
        }
    }

    pub fn push(&mut self, check: CheckReport) {
        self.pass &= check.pass;
        self.checks.push(check);
    }

    pub fn finish(&mut self) {
        self.finished_unix_s = unix_now();
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let report: ExperimentReport = serde_json::from_str(s)?;
        if report.schema != REPORT_SCHEMA {
            return Err(Error::Config(format!(
                "unknown report schema {:?} (expected {REPORT_SCHEMA})",
                report.schema
            )));
        }
        Ok(report)
    }
}

fn unix_now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

// ---------------------------------------------------------------------------
// Report comparison
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftKind {
    /// Value moved beyond its stored tolerance.
    Drift,
    /// Value moved, but the checks ran at different resolutions and the
    /// measurement is marked refinement-sensitive.
    ExpectedDrift,
    /// Measurement present on one side only.
    Missing,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DriftEntry {
    pub check: String,
    pub measurement: String,
    pub kind: DriftKind,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiffSummary {
    pub kind: String,
    pub entries: Vec<DriftEntry>,
}

impl DiffSummary {
    pub fn unexpected(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| e.kind != DriftKind::ExpectedDrift)
            .count()
    }
}

/// Tolerance-aware diff of two reports of the same experiment kind.
///
/// A measurement drifts when `|a - b|` exceeds the larger stored tolerance
/// (bitwise equality is demanded when neither side carries one).  Checks
/// whose context differs (e.g. grid resolution) downgrade
/// refinement-sensitive drifts to expected drift.
pub fn compare(a: &ExperimentReport, b: &ExperimentReport) -> Result<DiffSummary> {
    if a.kind != b.kind {
        return Err(Error::KindMismatch {
            a: a.kind.clone(),
            b: b.kind.clone(),
        });
    }
    let mut entries = Vec::new();
    for ca in &a.checks {
        let Some(cb) = b.checks.iter().find(|c| c.check == ca.check) else {
            entries.push(DriftEntry {
                check: ca.check.clone(),
                measurement: "*".into(),
                kind: DriftKind::Missing,
                a: None,
                b: None,
                tolerance: None,
            });
            continue;
        };
        let context_differs = ca.context != cb.context;
        for ma in &ca.measurements {
            let Some(mb) = cb.get(&ma.name) else {
                entries.push(DriftEntry {
                    check: ca.check.clone(),
                    measurement: ma.name.clone(),
                    kind: DriftKind::Missing,
                    a: Some(ma.value),
                    b: None,
                    tolerance: ma.tolerance,
                });
                continue;
            };
            let tol = match (ma.tolerance, mb.tolerance) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (Some(x), None) | (None, Some(x)) => Some(x),
                (None, None) => None,
            };
            let drifted = match tol {
                Some(t) => (ma.value - mb.value).abs() > t,
                None => ma.value.to_bits() != mb.value.to_bits(),
            };
            if drifted {
                let kind = if context_differs && ma.refinement_sensitive {
                    DriftKind::ExpectedDrift
                } else {
                    DriftKind::Drift
                };
                entries.push(DriftEntry {
                    check: ca.check.clone(),
                    measurement: ma.name.clone(),
                    kind,
                    a: Some(ma.value),
                    b: Some(mb.value),
                    tolerance: tol,
                });
            }
        }
    }
    Ok(DiffSummary {
        kind: a.kind.clone(),
        entries,
    })
}

// ---------------------------------------------------------------------------
// Versioned CSV
// ---------------------------------------------------------------------------

/// Write a CSV document with a schema tag on the first line.
pub fn write_csv(schema: &str, header: &str, rows: &[String]) -> String {
    let mut out = String::new();
    out.push_str(&format!("# schema={schema}\n"));
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(row);
        out.push('\n');
    }
    out
}

/// Parse a CSV document produced by [`write_csv`], rejecting unknown
/// schema versions.
pub fn read_csv(content: &str, expected_schema: &str) -> Result<Vec<Vec<String>>> {
    let mut lines = content.lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::Config("empty CSV document".into()))?;
    let schema = first
        .strip_prefix("# schema=")
        .ok_or_else(|| Error::Config("missing CSV schema line".into()))?;
    if schema != expected_schema {
        return Err(Error::Config(format!(
            "unknown CSV schema {schema:?} (expected {expected_schema})"
        )));
    }
    Ok(lines
        .skip(1)
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').map(|s| s.to_string()).collect())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_report(kind: &str, value: f64) -> ExperimentReport {
        let mut r = ExperimentReport::new(kind, "abc".into(), 1);
        let mut c = CheckReport::new("demo", true);
        c.push(Measurement::measured("stat", value).with_tolerance(0.5));
        c.push(Measurement::measured("exact", 2.0));
        r.push(c);
        r.finish();
        r
    }

    #[test]
    fn identical_reports_have_empty_diff() {
        let a = sample_report("rates", 1.0);
        let diff = compare(&a, &a).unwrap();
        assert!(diff.entries.is_empty());
    }

    #[test]
    fn drift_beyond_tolerance_is_flagged() {
        let a = sample_report("rates", 1.0);
        let b = sample_report("rates", 2.0);
        let diff = compare(&a, &b).unwrap();
        assert_eq!(diff.entries.len(), 1);
        assert_eq!(diff.entries[0].kind, DriftKind::Drift);
    }

    #[test]
    fn within_tolerance_is_quiet() {
        let a = sample_report("rates", 1.0);
        let b = sample_report("rates", 1.3);
        let diff = compare(&a, &b).unwrap();
        assert!(diff.entries.is_empty());
    }

    #[test]
    fn kind_mismatch_is_an_error() {
        let a = sample_report("rates", 1.0);
        let b = sample_report("simulate", 1.0);
        assert!(compare(&a, &b).is_err());
    }

    #[test]
    fn refinement_sensitive_downgrade() {
        let mut a = ExperimentReport::new("operator-lab", "h".into(), 1);
        let mut ca = CheckReport::new("residual", true);
        ca.context("resolution", "64".into());
        ca.push(Measurement::measured("r", 0.05).with_tolerance(1e-6).refinement_sensitive());
        a.push(ca);
        let mut b = ExperimentReport::new("operator-lab", "h".into(), 1);
        let mut cb = CheckReport::new("residual", true);
        cb.context("resolution", "128".into());
        cb.push(Measurement::measured("r", 0.02).with_tolerance(1e-6).refinement_sensitive());
        b.push(cb);
        let diff = compare(&a, &b).unwrap();
        assert_eq!(diff.entries.len(), 1);
        assert_eq!(diff.entries[0].kind, DriftKind::ExpectedDrift);
        assert_eq!(diff.unexpected(), 0);
    }

    #[test]
    fn csv_round_trip_and_schema_rejection() {
        let doc = write_csv("hypolab.rates.v1", "t,xi", &["1,0.5".into(), "2,0.25".into()]);
        let rows = read_csv(&doc, "hypolab.rates.v1").unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1][1], "0.25");
        assert!(read_csv(&doc, "hypolab.rates.v2").is_err());
    }

    #[test]
    fn report_json_round_trip() {
        let a = sample_report("rates", 1.0);
        let s = a.to_json().unwrap();
        let back = ExperimentReport::from_json(&s).unwrap();
        assert_eq!(back.checks[0].measurements[0].value, 1.0);
    }
}
