//! Named fixtures. Each expands into a complete [`RunConfig`].

use minimax_core::{ExtReal, GridSpec};

use crate::config::{Command, Params, Problem, RunConfig, Scan, Source, Table, Tolerances};

pub const NAMES: &[&str] = &[
    "example_1_1",
    "remark_5_1",
    "remark_5_1_minima",
    "remark_8_1",
    "remark_8_3",
    "corollary_8_1",
    "linear_quadratic",
    "spherical_quartic",
    "theta_double_well",
    "theta_quadratic",
    "lambda_star_cubic",
    "quintic_rho_star",
    "three_solutions_double_well",
    "farthest_tie_pair",
    "farthest_tie_triangle",
    "eq82_linear",
];

fn expr(s: &str) -> Option<Source> {
    Some(Source::Expr(s.to_string()))
}

fn base(name: &str, command: Command, domain: Option<GridSpec>) -> RunConfig {
    RunConfig {
        command: Some(command),
        problem: Problem {
            builtin: Some(name.to_string()),
            ..Problem::default()
        },
        domain,
        ..RunConfig::default()
    }
}

fn line(lo: f64, hi: f64, n: usize) -> Option<GridSpec> {
    Some(GridSpec::uniform_1d(lo, hi, n))
}

pub fn builtin(name: &str) -> Option<RunConfig> {
    let mut c;
    match name {
        "example_1_1" => {
            c = base(name, Command::MinimaxCheck, Some(GridSpec::explicit_1d(&[0.0, 1.0])));
            c.y_domain = line(0.0, 1.0, 101);
            let ys: Vec<f64> = (0..101).map(|j| j as f64 / 100.0).collect();
            let mut values = ys.clone();
            values.extend(ys.iter().map(|&y| if y > 0.0 { -y } else { 1.0 }));
            c.problem.f = Some(Source::Table(Table { values }));
        }
        "remark_5_1" => {
            c = base(name, Command::ScanRho, line(-3.0, 3.0, 60_001));
            c.problem.big_f = expr("-x^3");
            c.problem.big_phi = expr("x^2");
            c.params.rho_grid = Some(Scan {
                from: 0.05,
                to: 9.0,
                steps: 179,
            });
        }
        "remark_5_1_minima" => {
            c = base(name, Command::ThetaCompute, line(-1.0, 1.0, 2001));
            c.problem.j = expr("x^2 - x^3");
            c.tolerances.tol_val = Some(1e-6);
        }
        "remark_8_1" => {
            c = base(name, Command::Verify82, line(-10.0, 10.0, 2001));
            c.problem.phi = expr("min(x,1)^2 - (max(x,1) - 1)");
            c.problem.psi = expr("x^2");
            c.params = Params {
                weights: Some(vec![1.0, 2.0, 0.5]),
                p: Some(2.0),
                r: Some(1.0),
                samples: Some(10_000),
                seed: Some(42),
                ..Params::default()
            };
        }
        "remark_8_3" => {
            c = base(name, Command::Jensen, None);
            c.params.samples = Some(1000);
            c.params.seed = Some(42);
        }
        "corollary_8_1" => {
            c = base(name, Command::LogIneq, None);
            c.params.samples = Some(10_000);
            c.params.seed = Some(42);
        }
        "linear_quadratic" => {
            c = base(name, Command::PathSolve, line(-10.0, 10.0, 200_001));
            c.problem.j = expr("x");
            c.problem.big_phi = expr("x^2");
            c.params.a = Some(ExtReal::Finite(0.0));
            c.params.b = Some(ExtReal::PosInf);
            c.params.r = Some(1.0);
            c.params.r_from = Some(0.25);
            c.params.r_to = Some(4.0);
            c.params.steps = Some(15);
        }
        "spherical_quartic" => {
            c = base(name, Command::SphericalAnalyze, line(0.0, 10.0, 100_001));
            c.problem.big_psi = expr("2*x^2 - x^4");
            c.params.r_from = Some(0.1);
            c.params.r_to = Some(0.9);
            c.params.steps = Some(16);
            c.tolerances = Tolerances {
                fd_step: Some(1e-3),
                ..Tolerances::default()
            };
        }
        "theta_double_well" | "theta_quadratic" => {
            c = base(name, Command::ThetaCompute, line(-2.0, 2.0, 401));
            c.problem.j = expr(if name == "theta_double_well" {
                "(x^2-1)^2"
            } else {
                "x^2"
            });
            c.params.mu = Some(if name == "theta_double_well" { 0.5 } else { 1.5 });
        }
        "lambda_star_cubic" => {
            c = base(name, Command::FindLambda, line(-1.5, 1.5, 3001));
            c.problem.j = expr("x^2 - x^3");
            c.problem.big_phi = expr("x^2");
            c.params.lambda_scan = Some(Scan {
                from: 0.01,
                to: 3.0,
                steps: 299,
            });
        }
        "quintic_rho_star" => {
            c = base(name, Command::ScanRho, line(-3.0, 3.0, 60_001));
            c.problem.big_f = expr("-x^5");
            c.problem.big_phi = expr("x^2");
            c.params.rho_grid = Some(Scan {
                from: 0.05,
                to: 8.0,
                steps: 159,
            });
        }
        "three_solutions_double_well" => {
            c = base(name, Command::ThreeSolutions, line(-2.0, 2.0, 4001));
            c.problem.j = expr("(x^2-1)^2");
            c.params.mu = Some(1.0);
            c.params.lambda_scan = Some(Scan {
                from: -1.0,
                to: 1.0,
                steps: 200,
            });
        }
        "farthest_tie_pair" => {
            c = base(name, Command::FarthestTie, None);
            c.params.points = Some(vec![vec![0.0, 0.0], vec![1.0, 0.0]]);
            c.params.hull_grid_n = Some(10);
        }
        "farthest_tie_triangle" => {
            c = base(name, Command::FarthestTie, None);
            let h = 3f64.sqrt() / 2.0;
            c.params.points = Some(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, h]]);
            c.params.hull_grid_n = Some(600);
        }
        "eq82_linear" => {
            c = base(name, Command::Verify82, line(-10.0, 10.0, 2001));
            c.problem.phi = expr("x");
            c.problem.psi = expr("x^2");
            c.params = Params {
                weights: Some(vec![1.0, 1.0, 1.0]),
                p: Some(2.0),
                r: Some(1.0),
                samples: Some(10_000),
                seed: Some(42),
                ..Params::default()
            };
        }
        _ => return None,
    }
    Some(c)
}
