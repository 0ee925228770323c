//! Run configuration: strict JSON loading, builtin expansion and validation.

use std::fmt;
use std::path::Path;

use minimax_core::integral::LogPowerFamily;
use minimax_core::{parse_expr, ExtReal, GridSpec};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::builtins;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Command {
    #[serde(rename = "minimax.check")]
    MinimaxCheck,
    #[serde(rename = "path.solve")]
    PathSolve,
    #[serde(rename = "path.scan")]
    PathScan,
    #[serde(rename = "spherical.analyze")]
    SphericalAnalyze,
    #[serde(rename = "theta.compute")]
    ThetaCompute,
    #[serde(rename = "multiplicity.scan-rho")]
    ScanRho,
    #[serde(rename = "multiplicity.find-lambda")]
    FindLambda,
    #[serde(rename = "multiplicity.farthest-tie")]
    FarthestTie,
    #[serde(rename = "multiplicity.three-solutions")]
    ThreeSolutions,
    #[serde(rename = "integral.verify-82")]
    Verify82,
    #[serde(rename = "integral.jensen")]
    Jensen,
    #[serde(rename = "integral.log-ineq")]
    LogIneq,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::MinimaxCheck => "minimax.check",
            Command::PathSolve => "path.solve",
            Command::PathScan => "path.scan",
            Command::SphericalAnalyze => "spherical.analyze",
            Command::ThetaCompute => "theta.compute",
            Command::ScanRho => "multiplicity.scan-rho",
            Command::FindLambda => "multiplicity.find-lambda",
            Command::FarthestTie => "multiplicity.farthest-tie",
            Command::ThreeSolutions => "multiplicity.three-solutions",
            Command::Verify82 => "integral.verify-82",
            Command::Jensen => "integral.jensen",
            Command::LogIneq => "integral.log-ineq",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A field given either as an expression or as values on the domain grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Source {
    Expr(String),
    Table(Table),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table {
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Problem {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(rename = "J", default, skip_serializing_if = "Option::is_none")]
    pub j: Option<Source>,
    #[serde(rename = "Phi", default, skip_serializing_if = "Option::is_none")]
    pub big_phi: Option<Source>,
    #[serde(rename = "Psi", default, skip_serializing_if = "Option::is_none")]
    pub big_psi: Option<Source>,
    #[serde(rename = "F", default, skip_serializing_if = "Option::is_none")]
    pub big_f: Option<Source>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<Source>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Source>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<Source>,
}

/// `steps + 1` equally spaced values from `from` to `to`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scan {
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

impl Scan {
    pub fn values(&self) -> Vec<f64> {
        linspace(self.from, self.to, self.steps)
    }
}

pub fn linspace(from: f64, to: f64, steps: usize) -> Vec<f64> {
    if steps == 0 {
        return vec![from];
    }
    (0..=steps)
        .map(|k| from + (to - from) * k as f64 / steps as f64)
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_from: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_to: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    /// Multiplier interval endpoints.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<ExtReal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<ExtReal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_grid: Option<Scan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_scan: Option<Scan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub all_events: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hull_grid_n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<LogPowerFamily>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_rejections: Option<usize>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_val: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_sep: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bisect_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cross_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fd_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derivative_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub euler_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sphere_tol: Option<f64>,
}

fn is_default<T: Default + PartialEq>(t: &T) -> bool {
    *t == T::default()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub problem: Problem,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<GridSpec>,
    /// The second grid of a bivariate `f(x, y)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_domain: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub params: Params,
    #[serde(default, skip_serializing_if = "is_default")]
    pub tolerances: Tolerances,
    /// Report destination; stdout when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("{message} (at `{key}`, line {line}, column {column})")]
    Parse {
        key: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{message} (at `{key}`)")]
    Validation { key: String, message: String },
}

impl ConfigError {
    pub fn kind(&self) -> &'static str {
        match self {
            ConfigError::Io { .. } => "io",
            ConfigError::Parse { .. } => "parse",
            ConfigError::Validation { .. } => "validation",
        }
    }

    pub fn context(&self) -> Value {
        match self {
            ConfigError::Io { path, .. } => serde_json::json!({ "path": path }),
            ConfigError::Parse { key, line, column, .. } => {
                serde_json::json!({ "key": key, "line": line, "column": column })
            }
            ConfigError::Validation { key, .. } => serde_json::json!({ "key": key }),
        }
    }

    fn invalid(key: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Validation {
            key: key.into(),
            message: message.into(),
        }
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    load_str(&text)
}

/// Parses, expands a builtin if one is named, and validates.
pub fn load_str(text: &str) -> Result<RunConfig, ConfigError> {
    let raw: RunConfig = strict_parse(text)?;
    let explicit = raw.command;
    let cfg = match raw.problem.builtin.clone() {
        Some(name) => {
            let base = builtins::builtin(&name)
                .ok_or_else(|| ConfigError::invalid("problem.builtin", format!("unknown builtin `{name}`")))?;
            let overlay: Value = serde_json::from_str(text).expect("already parsed");
            let merged = overlay_onto(serde_json::to_value(&base).expect("serializable"), overlay);
            serde_path_to_error::deserialize(merged)
                .map_err(|e| ConfigError::invalid(e.path().to_string(), e.to_string()))?
        }
        None => raw,
    };
    // A builtin's command is a default, so its inputs are only required once
    // the command actually runs.
    cfg.validate(explicit)?;
    Ok(cfg)
}

fn strict_parse(text: &str) -> Result<RunConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let key = e.path().to_string();
        let inner = e.into_inner();
        let mut message = inner.to_string();
        if let Some(i) = message.rfind(" at line ") {
            message.truncate(i);
        }
        ConfigError::Parse {
            key,
            line: inner.line(),
            column: inner.column(),
            message,
        }
    })?;
    Ok(cfg)
}

/// Keys inside `problem`, `params` and `tolerances` override one by one;
/// everything else (domains in particular) is replaced whole.
fn overlay_onto(mut base: Value, overlay: Value) -> Value {
    let (Value::Object(b), Value::Object(o)) = (&mut base, overlay) else {
        unreachable!("configs are objects")
    };
    for (k, v) in o {
        match (b.get_mut(&k), v) {
            (Some(Value::Object(inner)), Value::Object(add))
                if matches!(k.as_str(), "problem" | "params" | "tolerances") =>
            {
                inner.extend(add);
            }
            (_, v) => {
                b.insert(k, v);
            }
        }
    }
    base
}

fn positive(key: &str, v: Option<f64>) -> Result<(), ConfigError> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => Err(ConfigError::invalid(key, format!("must be positive, got {x}"))),
        _ => Ok(()),
    }
}

fn grid_len(spec: &GridSpec) -> usize {
    match spec {
        GridSpec::Uniform { n, .. } => n.iter().product(),
        GridSpec::Explicit { points } => points.len(),
    }
}

fn grid_dim(spec: &GridSpec) -> usize {
    match spec {
        GridSpec::Uniform { lo, .. } => lo.len(),
        GridSpec::Explicit { points } => points.first().map_or(0, Vec::len),
    }
}

impl RunConfig {
    /// Checks tolerances, grids and every referenced expression. With a
    /// command, also checks that the command's inputs are present.
    pub fn validate(&self, command: Option<Command>) -> Result<(), ConfigError> {
        let t = &self.tolerances;
        for (key, v) in [
            ("tolerances.tol_val", t.tol_val),
            ("tolerances.tol_sep", t.tol_sep),
            ("tolerances.gap_tol", t.gap_tol),
            ("tolerances.bisect_tol", t.bisect_tol),
            ("tolerances.cross_tol", t.cross_tol),
            ("tolerances.band", t.band),
            ("tolerances.fd_step", t.fd_step),
            ("tolerances.derivative_tol", t.derivative_tol),
            ("tolerances.euler_tol", t.euler_tol),
            ("tolerances.sphere_tol", t.sphere_tol),
        ] {
            positive(key, v)?;
        }
        if t.max_iter == Some(0) {
            return Err(ConfigError::invalid("tolerances.max_iter", "must be positive"));
        }
        for (key, spec) in [("domain", &self.domain), ("y_domain", &self.y_domain)] {
            if let Some(s) = spec {
                s.validate().map_err(|e| ConfigError::invalid(key, e.to_string()))?;
            }
        }
        let p = &self.params;
        positive("params.p", p.p)?;
        for (key, v) in [("params.samples", p.samples), ("params.hull_grid_n", p.hull_grid_n)] {
            if v == Some(0) {
                return Err(ConfigError::invalid(key, "must be positive"));
            }
        }
        for (key, s) in [("params.rho_grid", &p.rho_grid), ("params.lambda_scan", &p.lambda_scan)] {
            if let Some(s) = s {
                if !(s.from.is_finite() && s.to.is_finite()) {
                    return Err(ConfigError::invalid(key, "scan bounds must be finite"));
                }
            }
        }

        let dx = self.domain.as_ref().map(grid_dim);
        let nx = self.domain.as_ref().map(grid_len);
        let pr = &self.problem;
        for (key, src) in [
            ("problem.J", &pr.j),
            ("problem.Phi", &pr.big_phi),
            ("problem.Psi", &pr.big_psi),
            ("problem.F", &pr.big_f),
            ("problem.phi", &pr.phi),
            ("problem.psi", &pr.psi),
        ] {
            check_source(key, src.as_ref(), dx, nx)?;
        }
        let (f_dim, f_len) = if command == Some(Command::Jensen) {
            (Some(1), None)
        } else {
            match (&self.domain, &self.y_domain) {
                (Some(x), Some(y)) => (Some(grid_dim(x) + grid_dim(y)), Some(grid_len(x) * grid_len(y))),
                _ => (None, None),
            }
        };
        check_source("problem.f", pr.f.as_ref(), f_dim, f_len)?;

        if let Some(cmd) = command {
            for key in required(cmd) {
                if !self.has(key) {
                    return Err(ConfigError::invalid(*key, format!("required by {cmd}")));
                }
            }
        }
        Ok(())
    }

    fn has(&self, key: &str) -> bool {
        let (pr, p) = (&self.problem, &self.params);
        match key {
            "domain" => self.domain.is_some(),
            "y_domain" => self.y_domain.is_some(),
            "problem.J" => pr.j.is_some(),
            "problem.Phi" => pr.big_phi.is_some(),
            "problem.Psi" => pr.big_psi.is_some(),
            "problem.F" => pr.big_f.is_some(),
            "problem.f" => pr.f.is_some(),
            "problem.phi" => pr.phi.is_some(),
            "problem.psi" => pr.psi.is_some(),
            "params.r" => p.r.is_some(),
            "params.r_from" => p.r_from.is_some(),
            "params.r_to" => p.r_to.is_some(),
            "params.steps" => p.steps.is_some(),
            "params.mu" => p.mu.is_some(),
            "params.rho_grid" => p.rho_grid.is_some(),
            "params.lambda_scan" => p.lambda_scan.is_some(),
            "params.points" => p.points.is_some(),
            "params.weights" => p.weights.is_some(),
            _ => unreachable!("unknown key {key}"),
        }
    }
}

fn required(cmd: Command) -> &'static [&'static str] {
    match cmd {
        Command::MinimaxCheck => &["domain", "y_domain", "problem.f"],
        Command::PathSolve => &["domain", "problem.J", "problem.Phi", "params.r"],
        Command::PathScan => &[
            "domain",
            "problem.J",
            "problem.Phi",
            "params.r_from",
            "params.r_to",
            "params.steps",
        ],
        Command::SphericalAnalyze => &["domain", "problem.Psi", "params.r_from", "params.r_to", "params.steps"],
        Command::ThetaCompute => &["domain", "problem.J"],
        Command::ScanRho => &["domain", "problem.F", "problem.Phi", "params.rho_grid"],
        Command::FindLambda => &["domain", "problem.J", "problem.Phi", "params.lambda_scan"],
        Command::FarthestTie => &["params.points"],
        Command::ThreeSolutions => &["domain", "problem.J", "params.mu", "params.lambda_scan"],
        Command::Verify82 => &["domain", "problem.phi", "problem.psi", "params.weights", "params.r"],
        Command::Jensen | Command::LogIneq => &[],
    }
}

fn check_source(key: &str, src: Option<&Source>, dim: Option<usize>, len: Option<usize>) -> Result<(), ConfigError> {
    match src {
        None => Ok(()),
        Some(Source::Expr(text)) => {
            // Without a domain the arity is unknown; 16 admits any x1..x16.
            parse_expr(text, dim.unwrap_or(16))
                .map(|_| ())
                .map_err(|e| ConfigError::invalid(key, e.to_string()))
        }
        Some(Source::Table(t)) => match len {
            Some(n) if n != t.values.len() => Err(ConfigError::invalid(
                format!("{key}.values"),
                format!("expected {n} values for the domain, got {}", t.values.len()),
            )),
            None => Err(ConfigError::invalid(key, "tabulated values need a domain")),
            _ => Ok(()),
        },
    }
}
