//! JSON run configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use vekua::curve::Curve;
use vekua::domain::Domain;
use vekua::exprfield::{parse, Frame};
use vekua::schrod::{RhoStructure, SchrodingerProblem, DEFAULT_TOL};
use vekua::Point2;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub problem: ProblemConfig,
    #[serde(default)]
    pub rho: Option<RhoConfig>,
    #[serde(default)]
    pub curves: BTreeMap<String, CurveConfig>,
    /// Claimed solutions of the Schrödinger equation, by name.
    #[serde(default)]
    pub solutions: BTreeMap<String, String>,
    #[serde(default)]
    pub pipeline: PipelineConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub u: String,
    pub f0: String,
    pub domain: BoxConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_grid")]
    pub grid: usize,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxConfig {
    pub x: [f64; 2],
    pub y: [f64; 2],
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Residuals computed from analytic jets.
    pub residual: f64,
    /// Residuals involving a finite-difference step.
    pub finite_difference: f64,
    /// Closed-form identities between coefficients and pairs.
    pub identity: f64,
    /// Both integrals of the Cauchy check.
    pub cauchy: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            residual: DEFAULT_TOL,
            finite_difference: 1e-4,
            identity: 1e-8,
            cauchy: 1e-8,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RhoConfig {
    pub rho: String,
    pub s: String,
    /// Antiderivative of `s`; integrated numerically when absent.
    #[serde(default, rename = "S")]
    pub big_s: Option<String>,
    pub f0_of_rho: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum CurveConfig {
    Param { x: String, y: String },
    Polyline { points: Vec<Point2> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    /// Defaults to the center of the domain box.
    pub anchor: Option<Point2>,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    pub steps: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            anchor: None,
            c: 1.0,
            c1: -2.0,
            c2: 1.0,
            steps: 1,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub report: Option<String>,
    pub dir: Option<String>,
}

fn default_grid() -> usize {
    vekua::domain::DEFAULT_GRID
}

/// A configuration problem, located by its JSON path.
#[derive(Debug)]
pub struct ConfigError {
    pub location: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

pub(crate) fn err(location: impl Into<String>, message: impl fmt::Display) -> ConfigError {
    ConfigError {
        location: location.into(),
        message: message.to_string(),
    }
}

impl RunConfig {
    pub fn from_json(text: &str, origin: &str) -> Result<RunConfig, ConfigError> {
        let cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| err(format!("{origin}:{}:{}", e.line(), e.column()), e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| err(path.display().to_string(), e))?;
        RunConfig::from_json(&text, &path.display().to_string())
    }

    /// Checks everything that can be checked without evaluating fields.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let expr = |loc: &str, src: &str, frame: Frame| -> Result<(), ConfigError> {
            let e = parse(src).map_err(|e| err(loc, e))?;
            frame.check(&e).map_err(|e| err(loc, e))
        };
        expr("problem.u", &self.problem.u, Frame::Plane)?;
        expr("problem.f0", &self.problem.f0, Frame::Plane)?;
        self.domain()?;
        let t = &self.problem.tolerances;
        for (name, v) in [
            ("residual", t.residual),
            ("finite_difference", t.finite_difference),
            ("identity", t.identity),
            ("cauchy", t.cauchy),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(err(
                    format!("problem.tolerances.{name}"),
                    "must be positive",
                ));
            }
        }
        if self.problem.grid < 2 {
            return Err(err("problem.grid", "needs at least 2 samples per axis"));
        }
        if let Some(r) = &self.rho {
            expr("rho.rho", &r.rho, Frame::Plane)?;
            expr("rho.s", &r.s, Frame::Profile)?;
            if let Some(s) = &r.big_s {
                expr("rho.S", s, Frame::Profile)?;
            }
            expr("rho.f0_of_rho", &r.f0_of_rho, Frame::Profile)?;
        }
        for (name, c) in &self.curves {
            self.curve_of(name, c)?;
        }
        for (name, s) in &self.solutions {
            expr(&format!("solutions.{name}"), s, Frame::Plane)?;
        }
        let p = &self.pipeline;
        for (name, v) in [("C", p.c), ("C1", p.c1), ("C2", p.c2)] {
            if !v.is_finite() {
                return Err(err(format!("pipeline.{name}"), "must be finite"));
            }
        }
        if p.c == 0.0 {
            return Err(err("pipeline.C", "must be nonzero"));
        }
        if let Some(a) = p.anchor {
            if !a.iter().all(|v| v.is_finite()) {
                return Err(err("pipeline.anchor", "must be finite"));
            }
        }
        Ok(())
    }

    pub fn domain(&self) -> Result<Domain, ConfigError> {
        let b = self.problem.domain;
        Domain::new(b.x, b.y).map_err(|e| err("problem.domain", e))
    }

    pub fn anchor(&self) -> Result<Point2, ConfigError> {
        Ok(self.pipeline.anchor.unwrap_or(self.domain()?.center()))
    }

    pub fn schrodinger(&self) -> Result<SchrodingerProblem, ConfigError> {
        let mut p = SchrodingerProblem::new(&self.problem.u, &self.problem.f0, self.domain()?)
            .map_err(|e| err("problem", e))?;
        p.grid = self.problem.grid;
        p.tol = self.problem.tolerances.residual;
        Ok(p)
    }

    /// The ρ structure, with `S` integrated from `ρ(anchor)` when absent.
    pub fn rho_structure(&self) -> Result<Option<RhoStructure>, ConfigError> {
        let Some(r) = &self.rho else { return Ok(None) };
        let rho_field = vekua::exprfield::ScalarJetField::parse(&r.rho, Frame::Plane)
            .map_err(|e| err("rho.rho", e))?;
        let rho_ref = rho_field
            .value(&self.anchor()?)
            .map_err(|e| err("rho.rho", format!("at the anchor: {e}")))?;
        RhoStructure::new(&r.rho, &r.s, r.big_s.as_deref(), &r.f0_of_rho, rho_ref)
            .map(Some)
            .map_err(|e| err("rho", e))
    }

    fn curve_of(&self, name: &str, c: &CurveConfig) -> Result<Curve, ConfigError> {
        let loc = format!("curves.{name}");
        match c {
            CurveConfig::Param { x, y } => Curve::param(x, y).map_err(|e| err(loc, e)),
            CurveConfig::Polyline { points } => {
                if !points.iter().flatten().all(|v| v.is_finite()) {
                    return Err(err(loc, "points must be finite"));
                }
                Curve::polyline(points.clone()).map_err(|e| err(loc, e))
            }
        }
    }

    pub fn curve(&self, name: &str) -> Result<Curve, ConfigError> {
        let c = self
            .curves
            .get(name)
            .ok_or_else(|| err("curves", format!("no curve named `{name}`")))?;
        self.curve_of(name, c)
    }

    /// A claimed solution by name; `f0` names the known solution.
    pub fn solution(&self, name: &str) -> Result<String, ConfigError> {
        if name == "f0" {
            return Ok(self.problem.f0.clone());
        }
        self.solutions
            .get(name)
            .cloned()
            .ok_or_else(|| err("solutions", format!("no solution named `{name}`")))
    }
}
