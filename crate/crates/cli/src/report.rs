use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use vekua::schrod::Stats;
use vekua::Point2;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Check {
    pub name: String,
    /// `None` when the check could not be evaluated; see `message`.
    pub max_residual: Option<f64>,
    pub tolerance: f64,
    pub passed: bool,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub at: Option<Point2>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_s: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct StepReport {
    pub step: usize,
    pub curl: f64,
    pub vek2: f64,
    pub schrodinger: f64,
    pub vek1: f64,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: Option<String>,
    pub passed: bool,
    pub checks: Vec<Check>,
    /// Named scalar outputs, such as integral values or integration constants.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub values: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub steps: Vec<StepReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Report {
    pub fn new(command: &str, config: Option<String>) -> Self {
        Report {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config,
            passed: true,
            checks: Vec::new(),
            values: BTreeMap::new(),
            steps: Vec::new(),
            error: None,
        }
    }

    pub fn push(&mut self, c: Check) {
        self.passed &= c.passed;
        self.checks.push(c);
    }

    pub fn fail(&mut self, message: String) {
        self.passed = false;
        self.error = Some(message);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Runs checks and records them, optionally with wall-clock times.
pub struct Recorder {
    pub report: Report,
    pub timings: bool,
}

impl Recorder {
    pub fn new(report: Report, timings: bool) -> Self {
        Recorder { report, timings }
    }

    /// Record a sampled residual; an `Err` becomes a failed check.
    pub fn stats<E: std::fmt::Display>(
        &mut self,
        name: &str,
        tol: f64,
        run: impl FnOnce() -> Result<Stats, E>,
    ) {
        let t = Instant::now();
        let out = run();
        let rt = self.timings.then(|| t.elapsed().as_secs_f64());
        let check = match out {
            Ok(s) => Check {
                name: name.to_string(),
                max_residual: Some(s.max),
                tolerance: tol,
                passed: s.max <= tol,
                samples: s.samples,
                at: s.at,
                message: None,
                runtime_s: rt,
            },
            Err(e) => Check {
                name: name.to_string(),
                max_residual: None,
                tolerance: tol,
                passed: false,
                samples: 0,
                at: None,
                message: Some(e.to_string()),
                runtime_s: rt,
            },
        };
        self.report.push(check);
    }

    /// Record a single scalar residual.
    pub fn scalar<E: std::fmt::Display>(
        &mut self,
        name: &str,
        tol: f64,
        run: impl FnOnce() -> Result<f64, E>,
    ) {
        self.stats(name, tol, || {
            run().map(|r| Stats {
                max: if r.is_nan() { f64::INFINITY } else { r.abs() },
                at: None,
                samples: 1,
            })
        })
    }

    pub fn finish(self) -> Report {
        self.report
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_iff_within_tolerance() {
        let mut r = Recorder::new(Report::new("verify", None), false);
        r.scalar::<String>("small", 1e-6, || Ok(1e-9));
        assert!(r.report.passed);
        r.scalar::<String>("nan", 1e-6, || Ok(f64::NAN));
        r.scalar::<String>("error", 1e-6, || Err("boom".into()));
        let rep = r.finish();
        assert!(!rep.passed);
        assert_eq!(rep.checks.iter().filter(|c| c.passed).count(), 1);
        assert_eq!(rep.checks[2].message.as_deref(), Some("boom"));
        assert!(rep.checks.iter().all(|c| c.runtime_s.is_none()));
        let back: Report = serde_json::from_str(&rep.to_json()).unwrap();
        assert_eq!(back.checks.len(), 3);
    }
}
