use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::config_hash;
use super::stats::Estimate;
use crate::error::Result;

/// An estimate tagged with its radius and the curve it belongs to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusEstimate {
    pub label: String,
    pub radius: f64,
    pub estimate: Estimate,
}

/// A pass/fail assertion with its measured value and tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub limit: f64,
    pub detail: String,
}

/// The persisted outcome of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub experiment: String,
    pub config: Value,
    pub config_hash: String,
    pub version: String,
    pub estimates: Vec<RadiusEstimate>,
    pub derived: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub wall_clock_seconds: f64,
}

impl RunRecord {
    pub fn new<C: Serialize>(experiment: &str, config: &C) -> Result<Self> {
        Ok(RunRecord {
            experiment: experiment.to_string(),
            config: serde_json::to_value(config)?,
            config_hash: config_hash(config)?,
            version: env!("CARGO_PKG_VERSION").to_string(),
            estimates: Vec::new(),
            derived: BTreeMap::new(),
            checks: Vec::new(),
            passed: true,
            wall_clock_seconds: 0.0,
        })
    }

    pub fn estimate(&mut self, label: &str, radius: f64, estimate: Estimate) {
        self.estimates.push(RadiusEstimate { label: label.to_string(), radius, estimate });
    }

    pub fn derive<V: Serialize>(&mut self, key: &str, value: V) -> Result<()> {
        self.derived.insert(key.to_string(), serde_json::to_value(value)?);
        Ok(())
    }

    /// Records a check; the run passes only if every check does.
    pub fn check(&mut self, name: &str, passed: bool, measured: f64, limit: f64, detail: impl Into<String>) {
        self.passed &= passed;
        self.checks.push(Check { name: name.to_string(), passed, measured, limit, detail: detail.into() });
    }

    pub fn finish(mut self, started: Instant) -> Self {
        self.wall_clock_seconds = started.elapsed().as_secs_f64();
        self
    }

    /// The record with the wall-clock field zeroed, for reproducibility
    /// comparisons.
    pub fn without_timing(&self) -> Self {
        RunRecord { wall_clock_seconds: 0.0, ..self.clone() }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    /// One row per estimate.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "label,radius,value,stderr,ci_low,ci_high,successes,trials")?;
        for e in &self.estimates {
            let s = &e.estimate;
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                e.label, e.radius, s.value, s.stderr, s.ci_low, s.ci_high, s.successes, s.trials
            )?;
        }
        Ok(())
    }

    /// Writes CSV for `.csv` paths and JSON otherwise.
    pub fn save(&self, path: &Path) -> Result<()> {
        if path.extension().is_some_and(|e| e == "csv") {
            self.write_csv(std::fs::File::create(path)?)
        } else {
            self.write_json(path)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failed_check_fails_the_run() {
        let mut r = RunRecord::new("x", &serde_json::json!({"seed": 1})).unwrap();
        r.check("a", true, 1.0, 2.0, "");
        assert!(r.passed);
        r.check("b", false, 3.0, 2.0, "");
        assert!(!r.passed);
    }

    #[test]
    fn csv_has_one_row_per_estimate() {
        let mut r = RunRecord::new("x", &1).unwrap();
        r.estimate("torus", 0.1, Estimate::from_counts(3, 10, 0));
        r.estimate("torus", 0.2, Estimate::from_counts(6, 10, 0));
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().nth(2).unwrap().starts_with("torus,0.2,0.6,"));
    }

    #[test]
    fn json_round_trip() {
        let mut r = RunRecord::new("x", &serde_json::json!({"seed": 1})).unwrap();
        r.derive("bound", 0.5).unwrap();
        let back: RunRecord = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
    }
}
