//! Spherical maxima `γ(r) = sup_{‖x‖² = r} Ψ` through the multiplier path of
//! `λ‖x‖² − Ψ`, with numerical checks of the relations `γ′(r) = g⁻¹(r)` and
//! `Ψ′(x̂_r) = 2γ′(r)x̂_r`.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::FieldError;
use crate::ext_real::ExtReal;
use crate::field::ScalarField;
use crate::grid::{distance, norm_sq, Grid};
use crate::minima::ClusterTol;
use crate::multiplier_path::{
    alpha_beta, path_monotonicity_check, solve_constrained, GridMinimizer, MultiplierProblem, PathError, Resolution,
    SolveOpts, WellPosedCertificate,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SphericalError {
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("Ψ(0) = {0}, expected 0")]
    PsiNotZeroAtOrigin(f64),
    #[error("Ψ(0) cannot be checked: the origin is not a grid point and Ψ has no evaluator")]
    OriginUnavailable,
    #[error("invalid multiplier interval: a = {a}, b = {b}")]
    InvalidInterval { a: f64, b: ExtReal },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphericalTol {
    /// Central-difference step for γ′; defaults to `1e-3·(1+r)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fd_step: Option<f64>,
    /// Bound for `|γ′(r) − g⁻¹(r)|`.
    #[serde(default = "default_budget")]
    pub derivative_tol: f64,
    /// Bound for the Euler residual `‖Ψ′(x̂) − 2γ′x̂‖`.
    #[serde(default = "default_budget")]
    pub euler_tol: f64,
    /// Relative bound for `γ` against dense sphere sampling.
    #[serde(default = "default_sphere_tol")]
    pub sphere_tol: f64,
}

fn default_budget() -> f64 {
    5e-4
}

fn default_sphere_tol() -> f64 {
    1e-5
}

impl Default for SphericalTol {
    fn default() -> Self {
        SphericalTol {
            fd_step: None,
            derivative_tol: default_budget(),
            euler_tol: default_budget(),
            sphere_tol: default_sphere_tol(),
        }
    }
}

/// `Ψ` on a grid in `R^d` together with the multiplier interval `]a, b[`.
#[derive(Clone, Debug)]
pub struct SphericalProblem {
    pub psi: ScalarField,
    pub a: f64,
    pub b: ExtReal,
    pub tol: SphericalTol,
    pub cluster: ClusterTol,
    pub solve: SolveOpts,
    path: MultiplierProblem,
}

/// Grid estimates of `ρ = limsup Ψ/‖x‖²` (outer 10% shell) and
/// `σ = sup Ψ/‖x‖²`.
pub fn estimate_rho_sigma(psi: &ScalarField) -> (f64, f64) {
    let g = psi.grid();
    let r_max = g.points().map(norm_sq).fold(0.0, f64::max).sqrt();
    let mut rho = f64::NEG_INFINITY;
    let mut sigma = f64::NEG_INFINITY;
    for (i, p) in g.points().enumerate() {
        let n2 = norm_sq(p);
        if n2 == 0.0 {
            continue;
        }
        let q = psi.value(i) / n2;
        sigma = sigma.max(q);
        if n2.sqrt() >= 0.9 * r_max {
            rho = rho.max(q);
        }
    }
    (rho, sigma)
}

impl SphericalProblem {
    /// `a` and `b` default to `max{0, ρ̂}` and `σ̂` from [`estimate_rho_sigma`].
    pub fn new(psi: ScalarField, a: Option<f64>, b: Option<ExtReal>) -> Result<Self, SphericalError> {
        let origin = vec![0.0; psi.grid().dim()];
        let at_zero = psi.eval_at(&origin).ok_or(SphericalError::OriginUnavailable)?;
        if at_zero.abs() > 1e-12 {
            return Err(SphericalError::PsiNotZeroAtOrigin(at_zero));
        }
        let (rho, sigma) = estimate_rho_sigma(&psi);
        let a = a.unwrap_or(rho.max(0.0));
        let b = b.unwrap_or(ExtReal::Finite(sigma));
        if !(ExtReal::Finite(a) < b) || !a.is_finite() {
            return Err(SphericalError::InvalidInterval { a, b });
        }
        let grid: Arc<Grid> = psi.grid().clone();
        let j = psi.map(|v| -v)?;
        let phi = ScalarField::tabulate(grid, norm_sq)?;
        let path = MultiplierProblem::new(j, phi, ExtReal::Finite(a), b)?;
        Ok(SphericalProblem {
            psi,
            a,
            b,
            tol: SphericalTol::default(),
            cluster: ClusterTol::default(),
            solve: SolveOpts::default(),
            path,
        })
    }

    pub fn with_cluster_tol(mut self, tol: ClusterTol) -> Result<Self, SphericalError> {
        self.path = self.path.with_tol(tol)?;
        self.cluster = tol;
        Ok(self)
    }

    /// The underlying problem `J = −Ψ`, `Φ = ‖·‖²`.
    pub fn path(&self) -> &MultiplierProblem {
        &self.path
    }

    fn fd_step(&self, r: f64) -> f64 {
        self.tol.fd_step.unwrap_or(1e-3 * (1.0 + r.abs()))
    }

    /// `α = max{0, sup_{M_b}‖x‖²}` and `β = inf_{M_a}‖x‖²` (capped by the grid).
    pub fn alpha_beta(&self) -> Result<(f64, f64), SphericalError> {
        let ab = alpha_beta(&self.path)?;
        Ok((ab.alpha.to_f64().max(0.0), ab.beta.to_f64()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GPoint {
    pub lambda: f64,
    pub g: f64,
    pub y_hat: Vec<f64>,
}

/// `g(λ) = ‖ŷ_λ‖²` along `lambdas`.
pub fn trace_g(p: &SphericalProblem, lambdas: &[f64]) -> Result<Vec<GPoint>, SphericalError> {
    lambdas
        .par_iter()
        .map(|&l| {
            let m = crate::multiplier_path::inner_minimize(&p.path, l)?;
            Ok(GPoint {
                lambda: l,
                g: m.phi,
                y_hat: m.point,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GammaPoint {
    pub r: f64,
    pub gamma: f64,
    pub gamma_prime: f64,
    /// `g⁻¹(r)`, the multiplier of the constrained solve.
    pub g_inv: f64,
    /// Grid maximizer of `Ψ` on the sphere.
    pub x_hat: Vec<f64>,
    /// `x̂` moved onto `{‖x‖² = r}` by interpolating between the two grid
    /// points the path jumps across (equal to `x_hat` on an exact hit).
    pub x_on_sphere: Vec<f64>,
    pub dense_sup: Option<f64>,
    pub dense_argmax: Option<Vec<f64>>,
    /// `r ± fd_step` left `]α, β[` and a one-sided difference was used.
    pub near_boundary: bool,
}

fn gamma_of(cert: &WellPosedCertificate) -> f64 {
    -cert.dual_bound
}

fn on_sphere(cert: &WellPosedCertificate) -> Vec<f64> {
    match &cert.resolution {
        Resolution::Hit { .. } => cert.x_hat.clone(),
        Resolution::Jump {
            x_lo,
            x_hi,
            phi_lo,
            phi_hi,
        } => {
            let w = (phi_lo - cert.r) / (phi_lo - phi_hi);
            x_lo.iter().zip(x_hi).map(|(a, b)| a + w * (b - a)).collect()
        }
    }
}

/// Dense sampling of `{‖x‖² = r}` inside the grid box: `±√r` in 1-D, a
/// 3600-angle circle in 2-D, a 20000-point Fibonacci sphere otherwise.
pub fn dense_sphere_sup(psi: &ScalarField, r: f64) -> Option<(f64, Vec<f64>)> {
    let f = psi.evaluator()?;
    let g = psi.grid();
    let d = g.dim();
    let (lo, hi) = bounding_box(g);
    let rad = r.sqrt();
    let inside = |p: &[f64]| {
        p.iter()
            .enumerate()
            .all(|(k, &c)| c >= lo[k] - 1e-12 && c <= hi[k] + 1e-12)
    };
    let candidates: Vec<Vec<f64>> = match d {
        1 => vec![vec![-rad], vec![rad]],
        2 => (0..3600)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / 3600.0;
                vec![rad * t.cos(), rad * t.sin()]
            })
            .collect(),
        _ => fibonacci_sphere(d, 20_000)
            .into_iter()
            .map(|u| u.iter().map(|c| c * rad).collect())
            .collect(),
    };
    candidates.into_iter().filter(|p| inside(p)).map(|p| (f(&p), p)).fold(
        None,
        |best: Option<(f64, Vec<f64>)>, (v, p)| match best {
            Some((bv, _)) if bv >= v => best,
            _ => Some((v, p)),
        },
    )
}

fn bounding_box(g: &Grid) -> (Vec<f64>, Vec<f64>) {
    let d = g.dim();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for p in g.points() {
        for k in 0..d {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (lo, hi)
}

/// Near-uniform unit vectors: Fibonacci lattice in 3-D, extra coordinates
/// zero beyond that.
fn fibonacci_sphere(d: usize, n: usize) -> Vec<Vec<f64>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
            let rr = (1.0 - z * z).sqrt();
            let t = golden * k as f64;
            let mut v = vec![0.0; d];
            v[0] = rr * t.cos();
            v[1] = rr * t.sin();
            v[2] = z;
            v
        })
        .collect()
}

pub fn gamma_and_derivative(p: &SphericalProblem, rs: &[f64]) -> Result<Vec<GammaPoint>, SphericalError> {
    let (alpha, beta) = p.alpha_beta()?;
    rs.par_iter()
        .map(|&r| {
            let cert = solve_constrained(&p.path, r, &p.solve)?;
            let gamma = gamma_of(&cert);
            let h = p.fd_step(r);
            let (rp, rm) = (r + h, r - h);
            let up = rp < beta;
            let down = rm > alpha;
            let value = |s: f64| -> Result<f64, PathError> { Ok(gamma_of(&solve_constrained(&p.path, s, &p.solve)?)) };
            let gamma_prime = match (down, up) {
                (true, true) => (value(rp)? - value(rm)?) / (2.0 * h),
                (false, true) => (value(rp)? - gamma) / h,
                (true, false) => (gamma - value(rm)?) / h,
                (false, false) => f64::NAN,
            };
            let dense = dense_sphere_sup(&p.psi, r);
            Ok(GammaPoint {
                r,
                gamma,
                gamma_prime,
                g_inv: cert.lambda_hat,
                x_on_sphere: on_sphere(&cert),
                x_hat: cert.x_hat,
                dense_sup: dense.as_ref().map(|d| d.0),
                dense_argmax: dense.map(|d| d.1),
                near_boundary: !(up && down),
            })
        })
        .collect()
}

/// Central-difference gradient of `Ψ` at `x`: through the evaluator with
/// the grid spacing as step, or through grid neighbours of `index`.
fn gradient(psi: &ScalarField, x: &[f64], index: usize) -> Vec<f64> {
    let g = psi.grid();
    let h = g.spacing();
    if let Some(f) = psi.evaluator() {
        let mut buf = x.to_vec();
        return (0..x.len())
            .map(|k| {
                buf[k] = x[k] + h;
                let up = f(&buf);
                buf[k] = x[k] - h;
                let down = f(&buf);
                buf[k] = x[k];
                (up - down) / (2.0 * h)
            })
            .collect();
    }
    (0..g.dim())
        .map(|k| {
            let up = g.axis_neighbor(index, k, 1);
            let down = g.axis_neighbor(index, k, -1);
            match (down, up) {
                (Some(d), Some(u)) => (psi.value(u) - psi.value(d)) / (g.point(u)[k] - g.point(d)[k]),
                (None, Some(u)) => (psi.value(u) - psi.value(index)) / (g.point(u)[k] - g.point(index)[k]),
                (Some(d), None) => (psi.value(index) - psi.value(d)) / (g.point(index)[k] - g.point(d)[k]),
                (None, None) => f64::NAN,
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub passed: bool,
    /// Signed slack: positive when the check holds.
    pub margin: f64,
    pub detail: String,
}

impl Check {
    fn new(passed: bool, margin: f64, detail: impl Into<String>) -> Self {
        Check {
            passed,
            margin,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NonUniqueFinding {
    pub lambda: f64,
    pub points: Vec<Vec<f64>>,
    pub suggestion: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SphericalReport {
    pub label: String,
    pub a: f64,
    pub b: ExtReal,
    pub alpha: f64,
    pub beta: f64,
    /// `β <= α`: the interval is empty and every check passes vacuously.
    pub degenerate: bool,
    pub g_table: Vec<(f64, f64)>,
    pub gamma_table: Vec<(f64, f64, f64)>,
    pub euler_residuals: Vec<(f64, f64)>,
    pub derivative_gaps: Vec<(f64, f64)>,
    pub points: Vec<GammaPoint>,
    /// `r` values dropped because they are not inside `]α, β[`.
    pub excluded_r: Vec<f64>,
    /// Bracket `[lo, hi]` for `r* = inf{r > 0 : γ(r) > 0}` from the γ-table.
    pub r_star_bracket: Option<[f64; 2]>,
    pub checks: BTreeMap<String, Check>,
    pub non_unique: Option<NonUniqueFinding>,
}

impl SphericalReport {
    pub fn all_passed(&self) -> bool {
        self.non_unique.is_none() && self.checks.values().all(|c| c.passed)
    }
}

const LABEL: &str = "conclusions verified / hypotheses assumed";

pub fn verify_relations(p: &SphericalProblem, rs: &[f64]) -> Result<SphericalReport, SphericalError> {
    let (alpha, beta) = match p.alpha_beta() {
        Ok(ab) => ab,
        Err(SphericalError::Path(PathError::NonUniqueMinimum { lambda, points })) => {
            return Ok(non_unique_report(p, f64::NAN, f64::NAN, lambda, points));
        }
        Err(e) => return Err(e),
    };
    let mut report = SphericalReport {
        label: LABEL.into(),
        a: p.a,
        b: p.b,
        alpha,
        beta,
        degenerate: beta <= alpha,
        g_table: Vec::new(),
        gamma_table: Vec::new(),
        euler_residuals: Vec::new(),
        derivative_gaps: Vec::new(),
        points: Vec::new(),
        excluded_r: Vec::new(),
        r_star_bracket: None,
        checks: BTreeMap::new(),
        non_unique: None,
    };
    let mut inside: Vec<f64> = Vec::new();
    for &r in rs {
        if !report.degenerate && r > alpha && r < beta {
            inside.push(r);
        } else {
            report.excluded_r.push(r);
        }
    }
    inside.sort_by(f64::total_cmp);
    if inside.is_empty() {
        for name in ["a1", "a2", "a3", "a4", "a5", "a6", "a7"] {
            report
                .checks
                .insert(name.into(), Check::new(true, 0.0, "vacuous: no r inside ]α, β["));
        }
        return Ok(report);
    }

    let points = match gamma_and_derivative(p, &inside) {
        Ok(pts) => pts,
        Err(SphericalError::Path(PathError::NonUniqueMinimum { lambda, points })) => {
            return Ok(non_unique_report(p, alpha, beta, lambda, points));
        }
        Err(e) => return Err(e),
    };

    // (a2): g along the multipliers of the solves, plus interior λ samples.
    let mut lambdas: Vec<f64> = points.iter().map(|q| q.g_inv).collect();
    if let ExtReal::Finite(b) = p.b {
        lambdas.extend((1..20).map(|k| p.a + (b - p.a) * k as f64 / 20.0));
    }
    lambdas.sort_by(f64::total_cmp);
    lambdas.dedup();
    let mono = match path_monotonicity_check(&p.path, &lambdas, &GridMinimizer) {
        Ok(m) => m,
        Err(PathError::NonUniqueMinimum { lambda, points }) => {
            return Ok(non_unique_report(p, alpha, beta, lambda, points));
        }
        Err(e) => return Err(e.into()),
    };
    report.g_table = mono.g_table.clone();
    let g_min = mono.g_table.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    let g_max = mono.g_table.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
    report.checks.insert(
        "a2".into(),
        Check::new(
            mono.passed,
            if mono.passed { 0.0 } else { -1.0 },
            format!(
                "g non-increasing on {} multipliers; sampled range [{g_min}, {g_max}] ⊂ [α, β]",
                lambdas.len()
            ),
        ),
    );

    report.gamma_table = points.iter().map(|q| (q.r, q.gamma, q.gamma_prime)).collect();

    // (a3): γ against dense sphere sampling, and the maximizer location.
    let spacing = p.psi.grid().spacing();
    let mut worst_val = 0.0f64;
    let mut worst_loc = 0.0f64;
    let mut a3_ok = true;
    let mut sampled = 0;
    for q in &points {
        if let (Some(ds), Some(dx)) = (q.dense_sup, &q.dense_argmax) {
            sampled += 1;
            let tol = p.tol.sphere_tol * (1.0 + q.gamma.abs());
            let diff = (q.gamma - ds).abs();
            worst_val = worst_val.max(diff - tol);
            let arc = if p.psi.grid().dim() == 1 {
                0.0
            } else {
                2e-3 * q.r.sqrt()
            };
            let loc_tol = 2.0 * spacing + arc;
            let loc = distance(&q.x_on_sphere, dx);
            worst_loc = worst_loc.max(loc - loc_tol);
            a3_ok &= diff <= tol && loc <= loc_tol;
        }
    }
    report.checks.insert(
        "a3".into(),
        if sampled == 0 {
            Check::new(true, 0.0, "skipped: Ψ is tabulated only, no off-grid sphere samples")
        } else {
            Check::new(
                a3_ok,
                -worst_val.max(worst_loc),
                format!("γ vs dense sphere sup on {sampled} radii"),
            )
        },
    );

    // (a4): no isolated jumps in r ↦ x̂_r.
    let steps: Vec<f64> = points
        .windows(2)
        .map(|w| distance(&w[0].x_on_sphere, &w[1].x_on_sphere))
        .collect();
    let a4 = if steps.is_empty() {
        Check::new(true, 0.0, "single radius")
    } else {
        let mut sorted = steps.clone();
        sorted.sort_by(f64::total_cmp);
        let median = sorted[sorted.len() / 2];
        let max = *sorted.last().unwrap();
        let bound = 10.0 * median + 2.0 * spacing;
        Check::new(
            max <= bound,
            bound - max,
            format!("max step {max}, median step {median}"),
        )
    };
    report.checks.insert("a4".into(), a4);

    // (a5): γ increasing and strictly concave (chord test on triples).
    let increasing = points
        .windows(2)
        .map(|w| w[1].gamma - w[0].gamma)
        .fold(f64::INFINITY, f64::min);
    let concavity = points
        .windows(3)
        .map(|w| {
            let t = (w[1].r - w[0].r) / (w[2].r - w[0].r);
            w[1].gamma - (w[0].gamma + t * (w[2].gamma - w[0].gamma))
        })
        .fold(f64::INFINITY, f64::min);
    let margin = increasing.min(concavity);
    report.checks.insert(
        "a5".into(),
        Check::new(
            margin > 0.0 || points.len() < 2,
            margin,
            format!("min increment {increasing}, min concavity margin {concavity}"),
        ),
    );

    // (a6): Euler relation Ψ′(x̂) = 2γ′(r)x̂.
    let mut worst_euler = 0.0f64;
    for q in points.iter().filter(|q| !q.near_boundary) {
        let idx = p
            .psi
            .grid()
            .locate(&q.x_hat, 1e-9 * (1.0 + spacing))
            .expect("x̂ is a grid point");
        let grad = gradient(&p.psi, &q.x_on_sphere, idx);
        let res = grad
            .iter()
            .zip(&q.x_on_sphere)
            .map(|(d, x)| (d - 2.0 * q.gamma_prime * x).powi(2))
            .sum::<f64>()
            .sqrt();
        worst_euler = worst_euler.max(res);
        report.euler_residuals.push((q.r, res));
    }
    report.checks.insert(
        "a6".into(),
        Check::new(
            worst_euler <= p.tol.euler_tol,
            p.tol.euler_tol - worst_euler,
            format!("max Euler residual {worst_euler}"),
        ),
    );

    // (a7): γ′(r) = g⁻¹(r).
    let mut worst_gap = 0.0f64;
    for q in points.iter().filter(|q| !q.near_boundary) {
        let gap = (q.gamma_prime - q.g_inv).abs();
        worst_gap = worst_gap.max(gap);
        report.derivative_gaps.push((q.r, gap));
    }
    report.checks.insert(
        "a7".into(),
        Check::new(
            worst_gap <= p.tol.derivative_tol,
            p.tol.derivative_tol - worst_gap,
            format!("max |γ′ − g⁻¹| = {worst_gap}"),
        ),
    );

    // (a1): r* <= α < β, with r* bracketed by the first positive γ.
    let sign_tol = 1e-12;
    let bracket = points.iter().position(|q| q.gamma > sign_tol).map(|k| {
        let lo = if k == 0 { 0.0 } else { points[k - 1].r };
        [lo, points[k].r]
    });
    report.r_star_bracket = bracket;
    let a1 = match bracket {
        Some([lo, _]) => Check::new(
            lo <= alpha && alpha < beta,
            alpha - lo,
            format!("r* ∈ [{lo}, {}], α = {alpha}, β = {beta}", bracket.unwrap()[1]),
        ),
        None => Check::new(false, -1.0, "γ is never positive on the sampled radii"),
    };
    report.checks.insert("a1".into(), a1);
    report.points = points;
    Ok(report)
}

fn non_unique_report(
    p: &SphericalProblem,
    alpha: f64,
    beta: f64,
    lambda: f64,
    points: Vec<Vec<f64>>,
) -> SphericalReport {
    SphericalReport {
        label: LABEL.into(),
        a: p.a,
        b: p.b,
        alpha,
        beta,
        degenerate: false,
        g_table: Vec::new(),
        gamma_table: Vec::new(),
        euler_residuals: Vec::new(),
        derivative_gaps: Vec::new(),
        points: Vec::new(),
        excluded_r: Vec::new(),
        r_star_bracket: None,
        checks: BTreeMap::new(),
        non_unique: Some(NonUniqueFinding {
            lambda,
            points,
            suggestion: "λ‖x‖² − Ψ has several global minima; restrict the domain to break the symmetry \
                         (for example a half-line or half-space grid)"
                .into(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quartic(n: usize) -> SphericalProblem {
        let g = Arc::new(Grid::uniform_1d(0.0, 10.0, n).unwrap());
        SphericalProblem::new(ScalarField::from_expr(g, "2*x1^2 - x1^4").unwrap(), None, None).unwrap()
    }

    #[test]
    fn g_follows_closed_form() {
        let p = quartic(100_001);
        assert_eq!(p.a, 0.0);
        let t = trace_g(&p, &[1.0]).unwrap();
        assert!((t[0].g - 0.5).abs() < 2e-4, "g(1) = {}", t[0].g);
    }

    #[test]
    fn gamma_at_quarter() {
        let p = quartic(100_001);
        let q = &gamma_and_derivative(&p, &[0.25]).unwrap()[0];
        assert!((q.gamma - 0.4375).abs() < 1e-9);
        assert!((q.gamma_prime - 1.5).abs() < 1e-6);
        assert!((q.g_inv - 1.5).abs() < 1e-6);
    }

    #[test]
    fn zero_psi_is_degenerate() {
        let g = Arc::new(Grid::uniform_1d(0.0, 1.0, 101).unwrap());
        let p = SphericalProblem::new(
            ScalarField::from_expr(g, "0").unwrap(),
            Some(0.0),
            Some(ExtReal::Finite(1.0)),
        )
        .unwrap();
        let r = verify_relations(&p, &[0.5]).unwrap();
        assert!(r.degenerate);
        assert!(r.all_passed());
        assert_eq!(r.excluded_r, vec![0.5]);
    }

    #[test]
    fn rejects_nonzero_origin() {
        let g = Arc::new(Grid::uniform_1d(0.0, 1.0, 11).unwrap());
        let psi = ScalarField::from_expr(g, "1 + x1").unwrap();
        assert!(matches!(
            SphericalProblem::new(psi, None, None),
            Err(SphericalError::PsiNotZeroAtOrigin(_))
        ));
    }
}
