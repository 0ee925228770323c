//! Command dispatch: builds fields from a [`RunConfig`], calls the solvers
//! and assembles the report.

use std::fmt;
use std::sync::Arc;

use minimax_core::integral::{
    jensen_check, log_inequality_check, log_inequality_suite, log_power_suite, verify_eq82, Eq82Opts,
};
use minimax_core::minimax::Alternative;
use minimax_core::multiplicity::{farthest_tie_point, find_lambda_star, scan_rho_star, three_solutions_1d};
use minimax_core::multiplier_path::{scan_constrained, PathError};
use minimax_core::spherical::{verify_relations, SphericalError, SphericalTol};
use minimax_core::strict_minimax::{check_theta_lower_bound, remark_checks, strict_gap_witness, theta};
use minimax_core::{
    classify_alternative, parse_expr, solve_constrained, BivariateField, ClusterTol, ExtReal, Grid, MinimaxTol,
    MultiplierProblem, ScalarField, SolveOpts, SphericalProblem, ThetaProblem, WeightedSpace,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::builtins;
use crate::config::{linspace, Command, ConfigError, RunConfig, Source};
use crate::report::SCHEMA;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    HypothesisFailure,
    Error,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::HypothesisFailure => 2,
            Status::Error => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::HypothesisFailure => "hypothesis_failure",
            Status::Error => "error",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Failure {
    pub kind: String,
    pub message: String,
    pub context: Value,
    /// A finding about the problem rather than a usage or numerical error.
    pub hypothesis: bool,
}

impl Failure {
    fn to_json(&self) -> Value {
        json!({ "kind": self.kind, "message": self.message, "context": self.context })
    }

    fn status(&self) -> Status {
        if self.hypothesis {
            Status::HypothesisFailure
        } else {
            Status::Error
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure {
            kind: e.kind().into(),
            message: e.to_string(),
            context: e.context(),
            hypothesis: false,
        }
    }
}

/// Error kind from the innermost variant name, e.g. `Path(NonUniqueMinimum
/// {..})` becomes `non_unique_minimum`.
fn kind_of(debug: &str) -> String {
    let mut s = debug;
    loop {
        let end = s.find(|c: char| !c.is_alphanumeric() && c != '_').unwrap_or(s.len());
        let (ident, rest) = s.split_at(end);
        let wraps = matches!(ident, "Field" | "Path" | "Theta" | "Expr")
            && rest.starts_with('(')
            && rest[1..].starts_with(|c: char| c.is_ascii_uppercase());
        if !wraps {
            let mut out = String::new();
            for (i, c) in ident.chars().enumerate() {
                if c.is_ascii_uppercase() {
                    if i > 0 {
                        out.push('_');
                    }
                    out.push(c.to_ascii_lowercase());
                } else {
                    out.push(c);
                }
            }
            return out;
        }
        s = &rest[1..];
    }
}

const FINDINGS: &[&str] = &["non_unique_minimum", "hypothesis_violation", "no_witness", "no_bracket"];

fn fail<E: fmt::Debug + fmt::Display>(e: E) -> Failure {
    let kind = kind_of(&format!("{e:?}"));
    Failure {
        hypothesis: FINDINGS.contains(&kind.as_str()),
        message: e.to_string(),
        context: json!({}),
        kind,
    }
}

fn path_fail(e: PathError) -> Failure {
    let context = match &e {
        PathError::NonUniqueMinimum { lambda, points } => json!({ "lambda": lambda, "points": points }),
        PathError::RangeError { r, alpha, beta } => json!({ "r": r, "alpha": alpha, "beta": beta }),
        _ => json!({}),
    };
    Failure { context, ..fail(e) }
}

fn keyed(key: &str) -> impl Fn(Failure) -> Failure + '_ {
    move |f| Failure {
        context: json!({ "key": key }),
        ..f
    }
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

pub struct Outcome {
    pub status: Status,
    pub report: Value,
}

/// Runs `command` and builds the full report. Never panics on bad input:
/// every problem ends up in the report's `error` member.
pub fn execute(command: Command, cfg: &RunConfig) -> Outcome {
    let mut cfg = cfg.clone();
    let result = check_command(command, &cfg).and_then(|()| {
        cfg.command = Some(command);
        dispatch(command, &cfg)
    });
    let mut report = json!({
        "schema": SCHEMA,
        "command": command.name(),
        "config": cfg,
    });
    let status = match result {
        Ok((value, status)) => {
            report["result"] = value;
            status
        }
        Err(f) => {
            report["error"] = f.to_json();
            f.status()
        }
    };
    report["status"] = json!(status.name());
    Outcome { status, report }
}

/// Report for failures that happen before a config exists.
pub fn error_report(command: Option<Command>, failure: &Failure) -> Value {
    json!({
        "schema": SCHEMA,
        "command": command.map(Command::name),
        "status": Status::Error.name(),
        "error": failure.to_json(),
    })
}

fn check_command(command: Command, cfg: &RunConfig) -> Result<(), Failure> {
    // A builtin's own command is only a default.
    let from_builtin = cfg
        .problem
        .builtin
        .as_deref()
        .and_then(builtins::builtin)
        .and_then(|b| b.command);
    if let Some(c) = cfg.command {
        if c != command && from_builtin != Some(c) {
            return Err(Failure {
                kind: "validation".into(),
                message: format!("config is for {c}, not {command}"),
                context: json!({ "key": "command" }),
                hypothesis: false,
            });
        }
    }
    cfg.validate(Some(command)).map_err(Failure::from)
}

type Run = Result<(Value, Status), Failure>;

fn dispatch(command: Command, cfg: &RunConfig) -> Run {
    match command {
        Command::MinimaxCheck => minimax_check(cfg),
        Command::PathSolve => path_solve(cfg),
        Command::PathScan => path_scan(cfg),
        Command::SphericalAnalyze => spherical_analyze(cfg),
        Command::ThetaCompute => theta_compute(cfg),
        Command::ScanRho => scan_rho(cfg),
        Command::FindLambda => find_lambda(cfg),
        Command::FarthestTie => farthest_tie(cfg),
        Command::ThreeSolutions => three_solutions(cfg),
        Command::Verify82 => verify_82(cfg),
        Command::Jensen => jensen(cfg),
        Command::LogIneq => log_ineq(cfg),
    }
}

// Presence of required keys is checked by `validate`, so the lookups below
// only unwrap what it guarantees.

fn grid(cfg: &RunConfig, y: bool) -> Result<Arc<Grid>, Failure> {
    let (key, spec) = if y {
        ("y_domain", &cfg.y_domain)
    } else {
        ("domain", &cfg.domain)
    };
    let spec = spec.clone().expect("validated");
    Grid::new(spec).map(Arc::new).map_err(|e| keyed(key)(fail(e)))
}

fn scalar(key: &str, src: &Option<Source>, g: &Arc<Grid>) -> Result<ScalarField, Failure> {
    let field = match src.as_ref().expect("validated") {
        Source::Expr(text) => ScalarField::from_expr(g.clone(), text),
        Source::Table(t) => ScalarField::from_values(g.clone(), t.values.clone()),
    };
    field.map_err(|e| keyed(key)(fail(e)))
}

fn cluster(cfg: &RunConfig) -> ClusterTol {
    ClusterTol {
        tol_val: cfg.tolerances.tol_val,
        tol_sep: cfg.tolerances.tol_sep,
    }
}

fn solve_opts(cfg: &RunConfig) -> SolveOpts {
    SolveOpts {
        bisect_tol: cfg.tolerances.bisect_tol,
        max_iter: cfg.tolerances.max_iter,
        cross_tol: cfg.tolerances.cross_tol,
    }
}

fn ok(v: Value) -> Run {
    Ok((v, Status::Ok))
}

fn judged(v: Value, good: bool) -> Run {
    Ok((v, if good { Status::Ok } else { Status::HypothesisFailure }))
}

fn minimax_check(cfg: &RunConfig) -> Run {
    let (x, y) = (grid(cfg, false)?, grid(cfg, true)?);
    let f = match cfg.problem.f.as_ref().expect("validated") {
        Source::Expr(text) => BivariateField::from_expr(x, y, text),
        Source::Table(t) => BivariateField::from_values(x, y, t.values.clone()),
    }
    .map_err(|e| keyed("problem.f")(fail(e)))?;
    let tol = MinimaxTol {
        gap_tol: cfg.tolerances.gap_tol,
        tol_val: cfg.tolerances.tol_val,
        tol_sep: cfg.tolerances.tol_sep,
    };
    let rep = classify_alternative(&f, &tol).map_err(fail)?;
    let witness = match &rep.alternative {
        Alternative::GapClosed => json!({ "x_star": rep.x_star, "y_star": rep.y_star }),
        Alternative::TwoMinima(t) => to_json(t),
        Alternative::Inconclusive { diagnostic } => to_json(diagnostic),
    };
    let conclusive = !matches!(rep.alternative, Alternative::Inconclusive { .. });
    let mut v = to_json(&rep);
    v["witness"] = witness;
    judged(v, conclusive)
}

fn path_problem(cfg: &RunConfig) -> Result<MultiplierProblem, Failure> {
    let g = grid(cfg, false)?;
    let j = scalar("problem.J", &cfg.problem.j, &g)?;
    let phi = scalar("problem.Phi", &cfg.problem.big_phi, &g)?;
    let a = cfg.params.a.unwrap_or(ExtReal::Finite(0.0));
    let b = cfg.params.b.unwrap_or(ExtReal::PosInf);
    MultiplierProblem::new(j, phi, a, b)
        .and_then(|p| p.with_tol(cluster(cfg)))
        .map_err(path_fail)
}

fn path_solve(cfg: &RunConfig) -> Run {
    let p = path_problem(cfg)?;
    let r = cfg.params.r.expect("validated");
    let cert = solve_constrained(&p, r, &solve_opts(cfg)).map_err(path_fail)?;
    ok(to_json(&cert))
}

fn path_scan(cfg: &RunConfig) -> Run {
    let p = path_problem(cfg)?;
    let pr = &cfg.params;
    let rs = linspace(pr.r_from.unwrap(), pr.r_to.unwrap(), pr.steps.unwrap());
    let mut status = Status::Ok;
    let entries: Vec<Value> = scan_constrained(&p, &rs, &solve_opts(cfg))
        .into_iter()
        .zip(&rs)
        .map(|(res, r)| match res {
            Ok(c) => json!({ "r": r, "certificate": c }),
            Err(e) => {
                let f = path_fail(e);
                status = match (status, f.status()) {
                    (Status::HypothesisFailure, _) | (_, Status::HypothesisFailure) => Status::HypothesisFailure,
                    _ => Status::Error,
                };
                json!({ "r": r, "error": f.to_json() })
            }
        })
        .collect();
    Ok((json!({ "scan": entries }), status))
}

fn spherical_fail(e: SphericalError) -> Failure {
    match e {
        SphericalError::Path(p) => path_fail(p),
        other => fail(other),
    }
}

fn spherical_analyze(cfg: &RunConfig) -> Run {
    let g = grid(cfg, false)?;
    let psi = scalar("problem.Psi", &cfg.problem.big_psi, &g)?;
    let a = match cfg.params.a {
        None => None,
        Some(ExtReal::Finite(a)) => Some(a),
        Some(other) => {
            return Err(Failure {
                kind: "validation".into(),
                message: format!("spherical analysis needs a finite a, got {other}"),
                context: json!({ "key": "params.a" }),
                hypothesis: false,
            })
        }
    };
    let mut p = SphericalProblem::new(psi, a, cfg.params.b)
        .and_then(|p| p.with_cluster_tol(cluster(cfg)))
        .map_err(spherical_fail)?;
    let t = &cfg.tolerances;
    let d = SphericalTol::default();
    p.tol = SphericalTol {
        fd_step: t.fd_step,
        derivative_tol: t.derivative_tol.unwrap_or(d.derivative_tol),
        euler_tol: t.euler_tol.unwrap_or(d.euler_tol),
        sphere_tol: t.sphere_tol.unwrap_or(d.sphere_tol),
    };
    p.solve = solve_opts(cfg);
    let pr = &cfg.params;
    let rs = linspace(pr.r_from.unwrap(), pr.r_to.unwrap(), pr.steps.unwrap());
    let rep = verify_relations(&p, &rs).map_err(spherical_fail)?;
    judged(to_json(&rep), rep.all_passed())
}

fn theta_compute(cfg: &RunConfig) -> Run {
    let g = grid(cfg, false)?;
    let j = scalar("problem.J", &cfg.problem.j, &g)?;
    let p = match &cfg.problem.big_phi {
        None => ThetaProblem::quadratic(j, |x| x.to_vec()),
        Some(Source::Expr(text)) => {
            let e = parse_expr(text, g.dim()).map_err(|e| keyed("problem.Phi")(fail(e)))?;
            ThetaProblem::quadratic(j, move |x| vec![e.eval(x)])
        }
        Some(Source::Table(_)) => {
            return Err(Failure {
                kind: "validation".into(),
                message: "theta.compute needs Phi as an expression".into(),
                context: json!({ "key": "problem.Phi" }),
                hypothesis: false,
            })
        }
    }
    .and_then(|p| p.with_tol(cluster(cfg)))
    .map_err(fail)?;
    let t = theta(&p).map_err(fail)?;
    let mut v = to_json(&t);
    v["remarks"] = to_json(&remark_checks(&p, t.theta).map_err(fail)?);
    if let Some(mu) = cfg.params.mu {
        let whole = vec![(0..g.len()).collect::<Vec<usize>>()];
        v["lower_bound"] = to_json(&check_theta_lower_bound(&p, mu, &whole).map_err(fail)?);
        v["witness"] = to_json(&strict_gap_witness(&p, mu, &whole).map_err(fail)?);
    }
    ok(v)
}

fn scan_rho(cfg: &RunConfig) -> Run {
    let g = grid(cfg, false)?;
    let f = scalar("problem.F", &cfg.problem.big_f, &g)?;
    let phi = scalar("problem.Phi", &cfg.problem.big_phi, &g)?;
    let all = cfg.params.all_events.unwrap_or(false);
    let rhos = cfg.params.rho_grid.unwrap().values();
    let found = scan_rho_star(&f, &phi, &rhos, cluster(cfg), all).map_err(fail)?;
    let mut v = json!({ "finding": found.first() });
    if all {
        v["events"] = to_json(&found);
    }
    ok(v)
}

fn find_lambda(cfg: &RunConfig) -> Run {
    let g = grid(cfg, false)?;
    let j = scalar("problem.J", &cfg.problem.j, &g)?;
    let phi = scalar("problem.Phi", &cfg.problem.big_phi, &g)?;
    let scan = cfg.params.lambda_scan.unwrap().values();
    let found = find_lambda_star(&j, &phi, &scan, cluster(cfg)).map_err(fail)?;
    ok(json!({ "finding": found }))
}

fn farthest_tie(cfg: &RunConfig) -> Run {
    let points = cfg.params.points.as_ref().expect("validated");
    let t = farthest_tie_point(points, cfg.params.hull_grid_n.unwrap_or(100)).map_err(fail)?;
    ok(to_json(&t))
}

fn three_solutions(cfg: &RunConfig) -> Run {
    let g = grid(cfg, false)?;
    let j = scalar("problem.J", &cfg.problem.j, &g)?;
    let scan = cfg.params.lambda_scan.unwrap().values();
    let f = three_solutions_1d(&j, cfg.params.mu.unwrap(), &scan, cluster(cfg)).map_err(fail)?;
    ok(json!({ "finding": f }))
}

fn space(cfg: &RunConfig, default_p: f64) -> Result<WeightedSpace, Failure> {
    let Some(weights) = cfg.params.weights.clone() else {
        return Err(Failure {
            kind: "validation".into(),
            message: "weights are required here".into(),
            context: json!({ "key": "params.weights" }),
            hypothesis: false,
        });
    };
    WeightedSpace::new(weights, cfg.params.p.unwrap_or(default_p)).map_err(|e| keyed("params.weights")(fail(e)))
}

fn integral_fail(e: minimax_core::integral::IntegralError) -> Failure {
    match e {
        minimax_core::integral::IntegralError::Path(p) => path_fail(p),
        other => fail(other),
    }
}

fn verify_82(cfg: &RunConfig) -> Run {
    let g = grid(cfg, false)?;
    let phi = scalar("problem.phi", &cfg.problem.phi, &g)?;
    let psi = scalar("problem.psi", &cfg.problem.psi, &g)?;
    let w = space(cfg, 2.0)?;
    let pr = &cfg.params;
    let opts = Eq82Opts {
        band: cfg.tolerances.band,
        a: pr.a,
        b: pr.b,
        max_rejections: pr.max_rejections,
    };
    let rep = verify_eq82(
        &phi,
        &psi,
        &w,
        pr.r.unwrap(),
        pr.samples.unwrap_or(10_000),
        pr.seed.unwrap_or(0),
        &opts,
    )
    .map_err(integral_fail)?;
    judged(to_json(&rep), rep.passed && rep.identity_guaranteed)
}

fn jensen(cfg: &RunConfig) -> Run {
    let pr = &cfg.params;
    let Some(u) = &pr.u else {
        let s = log_power_suite(pr.samples.unwrap_or(1000), pr.seed.unwrap_or(0)).map_err(integral_fail)?;
        return judged(to_json(&s), s.passed);
    };
    let w = space(cfg, 1.0)?;
    let rep = match (&cfg.problem.f, &pr.family) {
        (Some(Source::Expr(text)), None) => {
            let e = parse_expr(text, 1).map_err(|e| keyed("problem.f")(fail(e)))?;
            jensen_check(|y| e.eval(&[y]), &w, u)
        }
        (None, Some(fam)) => fam.validate().and_then(|()| jensen_check(|y| fam.eval(y), &w, u)),
        _ => {
            return Err(Failure {
                kind: "validation".into(),
                message: "give exactly one of problem.f (expression) and params.family".into(),
                context: json!({ "key": "problem.f" }),
                hypothesis: false,
            })
        }
    }
    .map_err(integral_fail)?;
    judged(to_json(&rep), rep.holds)
}

fn log_ineq(cfg: &RunConfig) -> Run {
    let pr = &cfg.params;
    match &pr.u {
        None => {
            let s = log_inequality_suite(pr.samples.unwrap_or(10_000), pr.seed.unwrap_or(0)).map_err(integral_fail)?;
            judged(to_json(&s), s.passed)
        }
        Some(u) => {
            let rep = log_inequality_check(&space(cfg, 1.0)?, u).map_err(integral_fail)?;
            judged(to_json(&rep), rep.holds)
        }
    }
}
