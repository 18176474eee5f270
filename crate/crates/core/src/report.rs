//! Machine-readable verification reports (JSON schema `wdvv-lab/1`, CSV).
//!
//! Records are canonically ordered (check id, then sample index) and the
//! summary is recomputed from the records at finalization, so identical
//! campaign configurations produce byte-identical reports except for the
//! `timing` block.

use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

/// Schema tag written at the top of every JSON report.
pub const SCHEMA: &str = "wdvv-lab/1";

/// One check evaluation at one sample.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CheckRecord {
    pub check_id: String,
    pub sample_index: usize,
    /// Family name for wdvv/hurwitz campaigns; empty for bare identities.
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub family: String,
    /// Human-readable sample inputs (complex literals).
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub inputs: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRecord {
    pub fn new(
        check_id: impl Into<String>,
        sample_index: usize,
        family: impl Into<String>,
        inputs: impl Into<String>,
        residual: f64,
        tolerance: f64,
    ) -> Self {
        CheckRecord {
            check_id: check_id.into(),
            sample_index,
            family: family.into(),
            inputs: inputs.into(),
            residual,
            tolerance,
            pass: residual.is_finite() && residual <= tolerance,
        }
    }

    /// A record for a check that could not be evaluated at all.
    pub fn error(
        check_id: impl Into<String>,
        sample_index: usize,
        family: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        CheckRecord {
            check_id: check_id.into(),
            sample_index,
            family: family.into(),
            inputs: format!("error: {}", message.into()),
            residual: f64::NAN,
            tolerance: 0.0,
            pass: false,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

/// Wall-clock data; excluded from determinism comparisons.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Timing {
    pub wall_time_ms: u128,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub samples_per_check: usize,
    pub records: Vec<CheckRecord>,
    pub summary: Summary,
    pub timing: Timing,
}

impl VerificationReport {
    pub fn new(command: impl Into<String>, seed: u64, samples_per_check: usize) -> Self {
        VerificationReport {
            schema: SCHEMA.into(),
            version: crate::VERSION.into(),
            command: command.into(),
            seed,
            samples_per_check,
            records: Vec::new(),
            summary: Summary::default(),
            timing: Timing::default(),
        }
    }

    pub fn push(&mut self, rec: CheckRecord) {
        self.records.push(rec);
    }

    pub fn extend(&mut self, recs: impl IntoIterator<Item = CheckRecord>) {
        self.records.extend(recs);
    }

    /// Canonical ordering and summary recomputation; call once after all
    /// records are collected.
    pub fn finalize(&mut self, wall_time_ms: u128) {
        self.records.sort_by(|a, b| {
            (a.check_id.as_str(), &a.family, a.sample_index)
                .cmp(&(b.check_id.as_str(), &b.family, b.sample_index))
        });
        let passed = self.records.iter().filter(|r| r.pass).count();
        self.summary = Summary {
            total: self.records.len(),
            passed,
            failed: self.records.len() - passed,
        };
        self.timing = Timing { wall_time_ms };
    }

    pub fn all_pass(&self) -> bool {
        self.summary.total == self.records.len()
            && self.summary.failed == 0
            && !self.records.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// JSON with the timing block stripped — the determinism contract
    /// compares these views byte for byte.
    pub fn deterministic_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serialization cannot fail");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("timing");
        }
        serde_json::to_string_pretty(&v).expect("report serialization cannot fail")
    }

    /// CSV: one row per record with fixed columns
    /// `check_id,sample_index,family,inputs,residual,tolerance,pass`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["check_id", "sample_index", "family", "inputs", "residual", "tolerance", "pass"])
            .expect("csv header");
        for r in &self.records {
            w.write_record([
                r.check_id.as_str(),
                &r.sample_index.to_string(),
                r.family.as_str(),
                r.inputs.as_str(),
                &format!("{:e}", r.residual),
                &format!("{:e}", r.tolerance),
                if r.pass { "true" } else { "false" },
            ])
            .expect("csv row");
        }
        String::from_utf8(w.into_inner().expect("csv flush")).expect("csv utf8")
    }

    pub fn write_to(&self, path: &Path, format: ReportFormat) -> std::io::Result<()> {
        let body = match format {
            ReportFormat::Json => self.to_json(),
            ReportFormat::Csv => self.to_csv(),
        };
        let mut f = std::fs::File::create(path)?;
        f.write_all(body.as_bytes())?;
        f.write_all(b"\n")
    }

    /// Worst failing records first, for console summaries.
    pub fn failures(&self) -> Vec<&CheckRecord> {
        let mut v: Vec<&CheckRecord> = self.records.iter().filter(|r| !r.pass).collect();
        v.sort_by(|a, b| {
            let ka = if a.residual.is_finite() { a.residual / a.tolerance.max(f64::MIN_POSITIVE) } else { f64::INFINITY };
            let kb = if b.residual.is_finite() { b.residual / b.tolerance.max(f64::MIN_POSITIVE) } else { f64::INFINITY };
            kb.partial_cmp(&ka).unwrap_or(std::cmp::Ordering::Equal)
        });
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(format!("unknown report format '{other}' (expected json or csv)")),
        }
    }
}

/// Formats a coordinate vector as comma-separated complex literals `a+bi`.
pub fn format_point(coords: &[crate::C64]) -> String {
    coords
        .iter()
        .map(|z| {
            if z.im >= 0.0 {
                format!("{}+{}i", z.re, z.im)
            } else {
                format!("{}-{}i", z.re, -z.im)
            }
        })
        .collect::<Vec<_>>()
        .join(",")
}
