//! The acceptance criteria, one pass/fail line each.
//!
//! Built with `harness = false` so the lines are printed on every run, not
//! only on failure. Every expected value comes from an oracle in this file
//! (closed forms, brute-force loops, dense scans), never from the solver
//! under test.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::Instant;

use minimax_cli::builtins;
use minimax_core::integral::{log_inequality_suite, verify_eq82, Eq82Opts};
use minimax_core::minimax::{
    classify_alternative, inf_sup, simplex_sup_inf, sup_inf, Alternative, Diagnostic, MinimaxTol,
};
use minimax_core::multiplicity::{
    farthest_tie_point, restricted_minima, scan_rho_star, three_solutions_1d, FindingContext,
};
use minimax_core::multiplier_path::{
    path_monotonicity_check, solve_constrained, GridMinimizer, MultiplierProblem, SolveOpts,
};
use minimax_core::spherical::{verify_relations, SphericalProblem};
use minimax_core::strict_minimax::{remark_checks, strict_gap_witness, theta_quadratic, ThetaProblem};
use minimax_core::{BivariateField, ClusterTol, ExtReal, Grid, GridSpec, ScalarField, WeightedSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

fn line(lo: f64, hi: f64, n: usize) -> Arc<Grid> {
    Arc::new(Grid::uniform_1d(lo, hi, n).unwrap())
}

fn field(lo: f64, hi: f64, n: usize, text: &str) -> ScalarField {
    ScalarField::from_expr(line(lo, hi, n), text).unwrap()
}

fn evenly(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_minimax-lab"))
}

fn c1_two_point_gap() -> Outcome {
    let x = Arc::new(Grid::explicit_1d(&[0.0, 1.0]).unwrap());
    let y = line(0.0, 1.0, 101);
    let f = BivariateField::tabulate(x, y, |x, y| match (x[0] == 0.0, y[0] > 0.0) {
        (true, _) => y[0],
        (false, true) => -y[0],
        (false, false) => 1.0,
    })
    .unwrap();
    let (si, is) = (sup_inf(&f), inf_sup(&f));
    ensure!(si == 0.0 && is == 1.0, "sup_inf = {si}, inf_sup = {is}");
    let rep = classify_alternative(&f, &MinimaxTol::default()).map_err(|e| e.to_string())?;
    let at_zero = match &rep.alternative {
        Alternative::Inconclusive {
            diagnostic: Diagnostic::Discontinuity { y_left, .. },
        } => y_left == &[0.0],
        Alternative::Inconclusive {
            diagnostic: Diagnostic::QuasiConcavityViolation { y1, y2, y3, .. },
        } => [y1, y2, y3].iter().any(|v| v.as_slice() == [0.0]),
        _ => false,
    };
    ensure!(at_zero, "alternative = {:?}", rep.alternative);
    // The builtin must encode the same table.
    let cfg = builtins::builtin("example_1_1").unwrap();
    let Some(minimax_cli::config::Source::Table(t)) = &cfg.problem.f else {
        return Err("example_1_1 builtin is not tabulated".into());
    };
    ensure!(t.values == f.values(), "builtin table differs from the fixture");
    Ok("sup_inf 0, inf_sup 1, inconclusive at y = 0".into())
}

fn c2_cubic_rho_scan() -> Outcome {
    let f = field(-3.0, 3.0, 60_001, "-x^3");
    let phi = field(-3.0, 3.0, 60_001, "x^2");
    let found =
        scan_rho_star(&f, &phi, &evenly(0.05, 9.0, 180), ClusterTol::default(), false).map_err(|e| e.to_string())?;
    let Some(first) = found.first() else {
        return Err("no ρ* found".into());
    };
    let FindingContext::RhoScan { rho_star } = first.context else {
        return Err(format!("unexpected context {:?}", first.context));
    };
    ensure!((rho_star - 1.0).abs() <= 1e-3, "ρ* = {rho_star}");
    let pts = &first.minima.points;
    ensure!(
        pts.len() == 2 && (pts[0][0] - 0.0).abs() <= 1e-3 && (pts[1][0] - 1.0).abs() <= 1e-3,
        "minima {pts:?}"
    );
    let total: Vec<f64> = f.values().iter().zip(phi.values()).map(|(a, b)| a + b).collect();
    for rho in [0.5, 2.0] {
        let m = restricted_minima(&total, &phi, rho, ClusterTol::default()).map_err(|e| e.to_string())?;
        ensure!(m.is_unique(), "ρ = {rho}: {} minima", m.len());
    }
    Ok(format!(
        "ρ* = {rho_star:.6}, minima {:?}",
        pts.iter().map(|p| p[0]).collect::<Vec<_>>()
    ))
}

fn c3_multiplier_path() -> Outcome {
    let g = line(-10.0, 10.0, 200_001);
    let p = MultiplierProblem::new(
        ScalarField::from_expr(g.clone(), "x").unwrap(),
        ScalarField::from_expr(g.clone(), "x^2").unwrap(),
        ExtReal::Finite(0.0),
        ExtReal::PosInf,
    )
    .unwrap();
    let h = g.spacing();
    for r in [0.25, 1.0, 4.0] {
        let c = solve_constrained(&p, r, &SolveOpts::default()).map_err(|e| e.to_string())?;
        let lambda = 1.0 / (2.0 * r.sqrt());
        ensure!((c.lambda_hat - lambda).abs() <= 1e-6, "r = {r}: λ̂ = {}", c.lambda_hat);
        ensure!((c.x_hat[0] + r.sqrt()).abs() <= h, "r = {r}: x̂ = {:?}", c.x_hat);
        let direct = g
            .coords_1d()
            .unwrap()
            .iter()
            .filter(|&&x| x * x <= r)
            .fold(f64::INFINITY, |m, &x| m.min(x));
        ensure!(
            (c.j_value - direct).abs() <= 1e-6,
            "r = {r}: J = {} vs {direct}",
            c.j_value
        );
    }

    let g = line(-3.0, 3.0, 2001);
    let lambdas: Vec<f64> = (0..121).map(|k| 10f64.powf(-2.0 + k as f64 / 30.0)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for case in 0..100 {
        let a: Vec<f64> = (0..5).map(|_| rng.random_range(-2.0..2.0)).collect();
        let c = [
            rng.random_range(0.1..2.0),
            rng.random_range(0.0..0.5),
            rng.random_range(-1.0..1.0),
        ];
        let j = ScalarField::tabulate(g.clone(), move |x| {
            let x = x[0];
            a[0] + x * (a[1] + x * (a[2] + x * (a[3] + x * a[4])))
        })
        .unwrap();
        let phi = ScalarField::tabulate(g.clone(), move |x| {
            c[0] * x[0] * x[0] + c[1] * x[0].powi(4) + c[2] * x[0]
        })
        .unwrap();
        let p = MultiplierProblem::new(j, phi, ExtReal::Finite(0.0), ExtReal::PosInf).unwrap();
        let rep = path_monotonicity_check(&p, &lambdas, &GridMinimizer).map_err(|e| e.to_string())?;
        ensure!(rep.violation.is_none(), "fixture {case}: {:?}", rep.violation);
        // Brute-force g(λ) = Φ at the first argmin of J + λΦ.
        let mut last = f64::INFINITY;
        for &l in &lambdas {
            let best = (0..g.len())
                .min_by(|&u, &v| {
                    let (fu, fv) = (p.j.value(u) + l * p.phi.value(u), p.j.value(v) + l * p.phi.value(v));
                    fu.total_cmp(&fv)
                })
                .unwrap();
            let gl = p.phi.value(best);
            ensure!(
                gl <= last + 1e-9 * (1.0 + last.abs()),
                "fixture {case}: g rises at λ = {l}"
            );
            last = gl;
        }
    }
    Ok("λ̂, x̂ and J at r ∈ {0.25, 1, 4}; 100 monotone random paths".into())
}

fn c4_weak_duality() -> Outcome {
    let x = line(0.0, 1.0, 50);
    let y = line(0.0, 1.0, 50);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..1000 {
        let values: Vec<f64> = (0..2500).map(|_| rng.random_range(-1.0..1.0)).collect();
        let f = BivariateField::from_values(x.clone(), y.clone(), values.clone()).unwrap();
        let (si, is) = (sup_inf(&f), inf_sup(&f));
        ensure!(si <= is, "field {case}: {si} > {is}");
        let oracle_si = (0..50)
            .map(|j| (0..50).map(|i| values[i * 50 + j]).fold(f64::INFINITY, f64::min))
            .fold(f64::NEG_INFINITY, f64::max);
        let oracle_is = (0..50)
            .map(|i| {
                values[i * 50..(i + 1) * 50]
                    .iter()
                    .copied()
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .fold(f64::INFINITY, f64::min);
        ensure!(
            si == oracle_si && is == oracle_is,
            "field {case}: values differ from the loops"
        );
    }
    Ok("1000 random 50×50 fields".into())
}

/// `sup` of `min_x f(x, λ)` over the barycentric lattice `{k/K}` (n = 2, 3).
fn lattice_sup(points: &[Vec<f64>], n: usize, k: usize, f: impl Fn(&[f64], &[f64]) -> f64) -> f64 {
    let kf = k as f64;
    let inner = |lam: &[f64]| points.iter().map(|x| f(x, lam)).fold(f64::INFINITY, f64::min);
    let mut best = f64::NEG_INFINITY;
    for i in 0..=k {
        if n == 2 {
            best = best.max(inner(&[i as f64 / kf, (k - i) as f64 / kf]));
        } else {
            for j in 0..=k - i {
                best = best.max(inner(&[i as f64 / kf, j as f64 / kf, (k - i - j) as f64 / kf]));
            }
        }
    }
    best
}

fn dot(x: &[f64], l: &[f64]) -> f64 {
    x.iter().zip(l).map(|(a, b)| a * b).sum()
}

fn c5_simplex() -> Outcome {
    let cases: Vec<Vec<Vec<f64>>> = vec![
        vec![vec![1.0, 0.0], vec![0.0, 1.0 / 3.0]],
        vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 0.5]],
        vec![vec![0.2, -0.4, 1.1], vec![-0.3, 0.5, 0.9], vec![0.1, 0.1, 0.7]],
    ];
    let mut worst: f64 = 0.0;
    for points in cases {
        let n = points[0].len();
        let got = simplex_sup_inf(dot, &GridSpec::Explicit { points: points.clone() }, n, 10_001)
            .map_err(|e| e.to_string())?;
        let want = lattice_sup(&points, n, if n == 2 { 100_000 } else { 4000 }, dot);
        ensure!(
            (got.value - want).abs() <= 1e-6,
            "affine n = {n}: {} vs {want}",
            got.value
        );
        worst = worst.max((got.value - want).abs());
    }
    let centers = [[0.7, 0.5, -0.1], [0.0, 0.2, 0.9]];
    let q = |x: &[f64], l: &[f64]| {
        let c = &centers[x[0] as usize];
        -l.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
    };
    let got = simplex_sup_inf(q, &GridSpec::explicit_1d(&[0.0, 1.0]), 3, 1001).map_err(|e| e.to_string())?;
    let want = lattice_sup(&[vec![0.0], vec![1.0]], 3, 1500, q);
    ensure!((got.value - want).abs() <= 1e-3, "quadratic: {} vs {want}", got.value);
    Ok(format!(
        "affine worst {worst:.1e}, quadratic {:.1e}",
        (got.value - want).abs()
    ))
}

fn c6_spherical() -> Outcome {
    let psi = field(0.0, 10.0, 100_001, "2*x^2 - x^4");
    let mut p = SphericalProblem::new(psi, None, None).map_err(|e| e.to_string())?;
    p.tol.fd_step = Some(1e-3);
    let rs: Vec<f64> = (0..=16).map(|k| 0.1 + 0.05 * k as f64).collect();
    let rep = verify_relations(&p, &rs).map_err(|e| e.to_string())?;
    ensure!(rep.non_unique.is_none(), "non-unique: {:?}", rep.non_unique);
    ensure!(
        rep.points.len() == rs.len(),
        "only {} of {} radii analysed",
        rep.points.len(),
        rs.len()
    );
    let (mut dg, mut dd) = (0.0f64, 0.0f64);
    for q in &rep.points {
        let exact = 2.0 * q.r - q.r * q.r;
        dg = dg.max((q.gamma - exact).abs());
        dd = dd.max((q.gamma_prime - q.g_inv).abs());
        // γ′ = 2 − 2r independently bounds the multiplier as well.
        ensure!(
            (q.g_inv - (2.0 - 2.0 * q.r)).abs() <= 5e-4,
            "g⁻¹({}) = {}",
            q.r,
            q.g_inv
        );
    }
    ensure!(dg <= 1e-5, "max |γ − (2r − r²)| = {dg:e}");
    ensure!(dd <= 5e-4, "max |γ′ − g⁻¹| = {dd:e}");
    let de = rep.euler_residuals.iter().map(|e| e.1).fold(0.0, f64::max);
    ensure!(de <= 5e-4, "max Euler residual = {de:e}");
    let gammas: Vec<f64> = rep.points.iter().map(|q| q.gamma).collect();
    let margin = gammas
        .windows(3)
        .map(|w| w[1] - 0.5 * (w[0] + w[2]))
        .fold(f64::INFINITY, f64::min);
    ensure!(margin > 0.0, "midpoint concavity margin {margin:e}");
    ensure!(
        rep.all_passed(),
        "failed checks: {:?}",
        rep.checks
            .iter()
            .filter(|c| !c.1.passed)
            .map(|c| c.0)
            .collect::<Vec<_>>()
    );
    Ok(format!(
        "|Δγ| {dg:.1e}, |γ′ − g⁻¹| {dd:.1e}, Euler {de:.1e}, concavity margin {margin:.1e}"
    ))
}

/// θ by brute force: minima by a plain scan, ratios over pairs with x ≠ u.
fn theta_oracle(j: &ScalarField) -> f64 {
    let xs = j.grid().coords_1d().unwrap();
    let v = j.values();
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let sep = 2.0 * j.grid().spacing();
    let mut best = f64::INFINITY;
    for (iu, &u) in xs.iter().enumerate().filter(|(i, _)| v[*i] <= min + 1e-12) {
        for (ix, &x) in xs.iter().enumerate() {
            if (x - u).abs() > sep {
                best = best.min((v[ix] - v[iu]) / ((x - u) * (x - u)));
            }
        }
    }
    best
}

fn c7_theta() -> Outcome {
    let mut out = Vec::new();
    for (text, want) in [("(x^2-1)^2", 0.0), ("x^2", 1.0)] {
        let j = field(-2.0, 2.0, 401, text);
        let t = theta_quadratic(&j, |x| x.to_vec(), ClusterTol::default()).map_err(|e| e.to_string())?;
        let got = t.theta.finite().ok_or("θ is infinite")?;
        ensure!((got - want).abs() <= 1e-9, "{text}: θ = {got}");
        ensure!(
            (got - theta_oracle(&j)).abs() <= 1e-12,
            "{text}: θ disagrees with brute force"
        );
        let p = ThetaProblem::quadratic(j, |x| x.to_vec()).map_err(|e| e.to_string())?;
        let r = remark_checks(&p, t.theta).map_err(|e| e.to_string())?;
        ensure!(r.minimality_equivalence && r.lambda_constant_on_minima, "{text}: {r:?}");
        let all = vec![(0..401).collect::<Vec<usize>>()];
        let w = strict_gap_witness(&p, got + 0.5, &all).map_err(|e| e.to_string())?;
        ensure!(w.sides.rhs - w.sides.lhs > 0.0, "{text}: no strict gap {:?}", w.sides);
        out.push(format!("θ({text}) = {got}"));
    }
    Ok(out.join(", "))
}

/// Real roots of 4x³ − 5x − y on [−2, 2] by a dense sign scan plus bisection.
fn cubic_roots(y: f64) -> Vec<f64> {
    let p = |x: f64| 4.0 * x * x * x - 5.0 * x - y;
    let n = 400_000;
    let mut roots = Vec::new();
    for k in 0..n {
        let (mut a, mut b) = (-2.0 + 4.0 * k as f64 / n as f64, -2.0 + 4.0 * (k + 1) as f64 / n as f64);
        if p(a) == 0.0 {
            roots.push(a);
        } else if p(a).signum() != p(b).signum() && p(b) != 0.0 {
            for _ in 0..60 {
                let m = 0.5 * (a + b);
                if p(a).signum() == p(m).signum() {
                    a = m;
                } else {
                    b = m;
                }
            }
            roots.push(0.5 * (a + b));
        }
    }
    roots
}

fn c8_three_solutions() -> Outcome {
    let j = field(-2.0, 2.0, 4001, "(x^2-1)^2");
    let f = three_solutions_1d(&j, 1.0, &evenly(-1.0, 1.0, 201), ClusterTol::default()).map_err(|e| e.to_string())?;
    let FindingContext::ThreeSolutions { y_mu, roots, .. } = &f.context else {
        return Err(format!("unexpected context {:?}", f.context));
    };
    ensure!(y_mu.abs() < 2.1517, "|y_μ| = {}", y_mu.abs());
    let want = cubic_roots(*y_mu);
    ensure!(
        want.len() == 3 && roots.len() == 3,
        "{} roots, oracle has {}",
        roots.len(),
        want.len()
    );
    let err = roots.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    ensure!(err <= 1e-4, "roots {roots:?} vs {want:?}");
    Ok(format!("y_μ = {y_mu:.6}, root error {err:.1e}"))
}

fn c9_farthest_tie() -> Outcome {
    let t = farthest_tie_point(&[vec![0.0, 0.0], vec![1.0, 0.0]], 10).map_err(|e| e.to_string())?;
    ensure!(t.point == [0.5, 0.0], "pair: {:?}", t.point);
    let h = 3f64.sqrt() / 2.0;
    let tri = [vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, h]];
    let t = farthest_tie_point(&tri, 600).map_err(|e| e.to_string())?;
    let off = (t.point[0] - 0.5).hypot(t.point[1] - h / 3.0);
    ensure!(off <= 1e-3, "triangle point {:?} is {off:e} from the centroid", t.point);
    for v in &tri {
        let d = (t.point[0] - v[0]).hypot(t.point[1] - v[1]);
        ensure!((d - 1.0 / 3f64.sqrt()).abs() <= 1e-3, "distance {d} to {v:?}");
    }
    Ok(format!("midpoint exact, triangle off by {off:.1e}"))
}

fn c10_integral() -> Outcome {
    let g = line(-10.0, 10.0, 2001);
    let phi = ScalarField::from_expr(g.clone(), "x").unwrap();
    let psi = ScalarField::from_expr(g, "x^2").unwrap();
    let w = WeightedSpace::new(vec![1.0, 1.0, 1.0], 2.0).unwrap();
    let rep = verify_eq82(&phi, &psi, &w, 1.0, 10_000, 42, &Eq82Opts::default()).map_err(|e| e.to_string())?;
    // inf of y over {y² = 1} is −1, times the mass 3.
    ensure!(
        rep.passed && rep.violations == 0,
        "φ = y: {} violations",
        rep.violations
    );
    ensure!((rep.rhs + 3.0).abs() <= 1e-12, "rhs = {}", rep.rhs);

    let out = bin()
        .args(["--quiet", "--builtin", "remark_8_1", "integral", "verify-82"])
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(
        out.status.code() == Some(2),
        "piecewise counterexample exit code {:?}",
        out.status.code()
    );
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    let probe = &v["result"]["probe_violation"];
    let zero = probe["tuple"]
        .as_array()
        .is_some_and(|t| t.iter().all(|u| u[0].as_f64() == Some(0.0)));
    let rhs = v["result"]["rhs"].as_f64().unwrap_or(f64::NAN);
    ensure!(
        zero && probe["objective"].as_f64() == Some(0.0) && rhs == 3.5,
        "probe {probe} vs rhs {rhs}"
    );

    let s = log_inequality_suite(10_000, 42).map_err(|e| e.to_string())?;
    ensure!(s.violations == 0, "{} violations", s.violations);
    ensure!(
        s.constant_exact == s.constant_checks,
        "{} of {} constant draws exact",
        s.constant_exact,
        s.constant_checks
    );
    Ok(
        "φ = y passes; the piecewise counterexample exits 2 with u ≡ 0 at 0 < 3.5; 10⁴ log-inequality draws clean"
            .into(),
    )
}

fn c11_determinism() -> Outcome {
    let run = |args: &[&str]| bin().args(args).output().map(|o| (o.status.code(), o.stdout));
    let mut runs = 0;
    for name in builtins::NAMES {
        let cfg = builtins::builtin(name).unwrap();
        let command = cfg.command.unwrap().name().replace('.', " ");
        let mut args = vec!["--quiet", "--builtin", name];
        args.extend(command.split(' '));
        let a = run(&args).map_err(|e| e.to_string())?;
        let b = run(&args).map_err(|e| e.to_string())?;
        ensure!(a == b, "{name}: reports differ");
        ensure!(!a.1.is_empty(), "{name}: empty report");
        runs += 1;
    }
    let base = [
        "--quiet",
        "--builtin",
        "eq82_linear",
        "--seed",
        "7",
        "integral",
        "verify-82",
    ];
    let one = run(&[&["--threads", "1"], &base[..]].concat()).map_err(|e| e.to_string())?;
    let four = run(&[&["--threads", "4"], &base[..]].concat()).map_err(|e| e.to_string())?;
    ensure!(one == four, "verify-82 depends on the thread count");
    Ok(format!(
        "{runs} builtins byte-identical twice; verify-82 identical on 1 and 4 threads"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("two-point tabulated gap", c1_two_point_gap),
        ("cubic ρ-scan", c2_cubic_rho_scan),
        ("multiplier-path engine and monotonicity", c3_multiplier_path),
        ("weak duality", c4_weak_duality),
        ("simplex recursion", c5_simplex),
        ("spherical quartic", c6_spherical),
        ("θ suite", c7_theta),
        ("three solutions", c8_three_solutions),
        ("farthest tie", c9_farthest_tie),
        ("integral suite", c10_integral),
        ("determinism", c11_determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("PASS {:>2}. {name}: {detail} [{secs:.1}s]", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2}. {name}: {detail} [{secs:.1}s]", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
