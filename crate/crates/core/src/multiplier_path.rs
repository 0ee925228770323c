//! The multiplier path `λ ↦ ŷ_λ = argmin (J + λΦ)` and constrained
//! minimization of `J` on `{Φ = r}` by bisection on `λ`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::FieldError;
use crate::ext_real::ExtReal;
use crate::field::ScalarField;
use crate::grid::distance;
use crate::minima::{minima_of_values, ClusterTol, MinimaCluster};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PathError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("multiplier interval is empty: a = {a}, b = {b}")]
    EmptyInterval { a: ExtReal, b: ExtReal },
    #[error("λ = {lambda} lies outside ]{a}, {b}[")]
    OutOfInterval { lambda: f64, a: ExtReal, b: ExtReal },
    #[error("J + λΦ has {} separated global minima at λ = {lambda}", points.len())]
    NonUniqueMinimum { lambda: f64, points: Vec<Vec<f64>> },
    #[error("r = {r} is outside ]{alpha}, {beta}[")]
    RangeError { r: f64, alpha: ExtReal, beta: ExtReal },
    #[error("g(λ) never crossed r = {r} (last λ = {last_lambda}, g = {last_g})")]
    NoBracket { r: f64, last_lambda: f64, last_g: f64 },
    #[error("bisection did not converge within {0} iterations")]
    MaxIter(usize),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),
    #[error("invalid λ-grid: {0}")]
    InvalidLambdaGrid(String),
}

/// `(J, Φ, ]a, b[)` with clustering tolerances for the inner minima.
#[derive(Clone, Debug)]
pub struct MultiplierProblem {
    pub j: ScalarField,
    pub phi: ScalarField,
    pub a: ExtReal,
    pub b: ExtReal,
    pub tol: ClusterTol,
}

impl MultiplierProblem {
    pub fn new(j: ScalarField, phi: ScalarField, a: ExtReal, b: ExtReal) -> Result<Self, PathError> {
        if !j.same_domain(&phi) {
            return Err(FieldError::DomainMismatch.into());
        }
        if a >= b {
            return Err(PathError::EmptyInterval { a, b });
        }
        Ok(MultiplierProblem {
            j,
            phi,
            a,
            b,
            tol: ClusterTol::default(),
        })
    }

    pub fn with_tol(mut self, tol: ClusterTol) -> Result<Self, PathError> {
        tol.validate()?;
        self.tol = tol;
        Ok(self)
    }

    pub fn contains(&self, lambda: f64) -> bool {
        ExtReal::open_contains(self.a, self.b, lambda)
    }

    /// Values of `J + λΦ` on the grid.
    pub fn combined(&self, lambda: f64) -> Vec<f64> {
        self.j
            .values()
            .iter()
            .zip(self.phi.values())
            .map(|(j, p)| j + lambda * p)
            .collect()
    }

    /// `min_X (J + λΦ)`, with no uniqueness requirement.
    pub fn lagrangian_min(&self, lambda: f64) -> f64 {
        self.j
            .values()
            .iter()
            .zip(self.phi.values())
            .map(|(j, p)| j + lambda * p)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn minima_at(&self, lambda: f64) -> Result<MinimaCluster, PathError> {
        Ok(minima_of_values(
            self.j.grid(),
            &self.combined(lambda),
            self.tol,
            |_| true,
        )?)
    }

    /// Closed interval of λ over which grid point `k` minimizes `J + λΦ`
    /// exactly, clipped to `]a, b[`.
    pub fn plateau(&self, k: usize) -> (f64, f64) {
        let (jv, pv) = (self.j.values(), self.phi.values());
        let mut lo = self.a.to_f64();
        let mut hi = self.b.to_f64();
        for i in 0..jv.len() {
            let dphi = pv[i] - pv[k];
            if dphi == 0.0 {
                continue;
            }
            let t = (jv[k] - jv[i]) / dphi;
            if dphi > 0.0 {
                lo = lo.max(t);
            } else {
                hi = hi.min(t);
            }
        }
        (lo, hi)
    }
}

/// The unique minimizer of `J + λΦ` at one `λ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InnerMin {
    pub lambda: f64,
    pub index: usize,
    pub point: Vec<f64>,
    pub value: f64,
    pub j: f64,
    pub phi: f64,
}

/// Strategy for `argmin_X (J + λΦ)`.
pub trait InnerMinimizer: Sync {
    fn minimize(&self, p: &MultiplierProblem, lambda: f64) -> Result<InnerMin, PathError>;
}

/// Exhaustive grid minimization; refuses non-unique minima.
#[derive(Clone, Copy, Debug, Default)]
pub struct GridMinimizer;

impl InnerMinimizer for GridMinimizer {
    fn minimize(&self, p: &MultiplierProblem, lambda: f64) -> Result<InnerMin, PathError> {
        let m = p.minima_at(lambda)?;
        if m.len() >= 2 {
            return Err(PathError::NonUniqueMinimum {
                lambda,
                points: m.points,
            });
        }
        let k = m.indices[0];
        Ok(InnerMin {
            lambda,
            index: k,
            point: m.points[0].clone(),
            value: m.value,
            j: p.j.value(k),
            phi: p.phi.value(k),
        })
    }
}

pub fn inner_minimize(p: &MultiplierProblem, lambda: f64) -> Result<InnerMin, PathError> {
    inner_minimize_with(p, lambda, &GridMinimizer)
}

pub fn inner_minimize_with(p: &MultiplierProblem, lambda: f64, m: &dyn InnerMinimizer) -> Result<InnerMin, PathError> {
    if !p.contains(lambda) {
        return Err(PathError::OutOfInterval { lambda, a: p.a, b: p.b });
    }
    m.minimize(p, lambda)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaBeta {
    pub alpha: ExtReal,
    pub beta: ExtReal,
    pub m_a: Option<MinimaCluster>,
    pub m_b: Option<MinimaCluster>,
    /// `alpha <= beta`.
    pub ordered: bool,
}

/// `α = max{inf Φ, sup_{M_b} Φ}`, `β = min{sup Φ, inf_{M_a} Φ}`, where `M_c` is
/// the set of global minima of `J + cΦ` (empty for an infinite endpoint).
pub fn alpha_beta(p: &MultiplierProblem) -> Result<AlphaBeta, PathError> {
    let phi_at = |m: &MinimaCluster| m.indices.iter().map(|&i| p.phi.value(i)).collect::<Vec<f64>>();
    let m_a = p.a.finite().map(|a| p.minima_at(a)).transpose()?;
    let m_b = p.b.finite().map(|b| p.minima_at(b)).transpose()?;
    let sup_mb = m_b.as_ref().map_or(ExtReal::NegInf, |m| {
        ExtReal::Finite(phi_at(m).into_iter().fold(f64::NEG_INFINITY, f64::max))
    });
    let inf_ma = m_a.as_ref().map_or(ExtReal::PosInf, |m| {
        ExtReal::Finite(phi_at(m).into_iter().fold(f64::INFINITY, f64::min))
    });
    let alpha = ExtReal::Finite(p.phi.min_value()).max(sup_mb);
    let beta = ExtReal::Finite(p.phi.max_value()).min(inf_ma);
    Ok(AlphaBeta {
        alpha,
        beta,
        m_a,
        m_b,
        ordered: alpha <= beta,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveOpts {
    /// Defaults to `1e-9·(1+|r|)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bisect_tol: Option<f64>,
    /// Defaults to 200.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    /// Defaults to `1e-6·(1+|J(x̂)|)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cross_tol: Option<f64>,
}

impl SolveOpts {
    fn bisect_tol(&self, r: f64) -> f64 {
        self.bisect_tol.unwrap_or(1e-9 * (1.0 + r.abs()))
    }

    fn max_iter(&self) -> usize {
        self.max_iter.unwrap_or(200)
    }
}

/// How the bisection ended.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Resolution {
    /// `|g(λ) - r| <= bisect_tol`; `λ̂` is the midpoint of the exact
    /// λ-interval on which `x̂` stays the minimizer.
    Hit { plateau: [f64; 2] },
    /// `g` steps over `r` between two neighbouring grid points; `λ̂` is the
    /// multiplier at which both tie and `x̂` is the one closer to `{Φ = r}`.
    Jump {
        x_lo: Vec<f64>,
        x_hi: Vec<f64>,
        phi_lo: f64,
        phi_hi: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossCheck {
    pub band: f64,
    pub direct_min: f64,
    pub difference: f64,
    pub cross_tol: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WellPosedCertificate {
    pub r: f64,
    pub lambda_hat: f64,
    pub x_hat: Vec<f64>,
    #[serde(rename = "J_value")]
    pub j_value: f64,
    pub phi_value: f64,
    pub phi_residual: f64,
    pub unique: bool,
    /// `min_X(J + λ̂Φ) - λ̂r`, a lower bound for `inf_{Φ=r} J`.
    pub dual_bound: f64,
    pub iterations: usize,
    pub resolution: Resolution,
    pub cross_check: CrossCheck,
}

fn start_lambda(a: ExtReal, b: ExtReal) -> f64 {
    match (a, b) {
        (ExtReal::Finite(a), ExtReal::Finite(b)) => 0.5 * (a + b),
        (ExtReal::Finite(a), _) => a + 1.0,
        (_, ExtReal::Finite(b)) => b - 1.0,
        _ => 1.0,
    }
}

/// k-th probe from `l0` toward the endpoint `end`: geometric approach to a
/// finite end, factor-10 expansion toward an infinite one.
fn probe_toward(l0: f64, end: ExtReal, k: i32) -> f64 {
    match end {
        ExtReal::Finite(e) => e + (l0 - e) * 10f64.powi(-k),
        ExtReal::PosInf => l0 + 10f64.powi(k) - 1.0,
        ExtReal::NegInf => l0 - 10f64.powi(k) + 1.0,
    }
}

const MAX_EXPANSIONS: i32 = 60;

/// Minimizes `J` on `{Φ = r}` through the multiplier path.
pub fn solve_constrained(p: &MultiplierProblem, r: f64, opts: &SolveOpts) -> Result<WellPosedCertificate, PathError> {
    solve_constrained_with(p, r, opts, &GridMinimizer)
}

pub fn solve_constrained_with(
    p: &MultiplierProblem,
    r: f64,
    opts: &SolveOpts,
    minimizer: &dyn InnerMinimizer,
) -> Result<WellPosedCertificate, PathError> {
    let ab = alpha_beta(p)?;
    if !ExtReal::open_contains(ab.alpha, ab.beta, r) {
        return Err(PathError::RangeError {
            r,
            alpha: ab.alpha,
            beta: ab.beta,
        });
    }
    let tol = opts.bisect_tol(r);
    let g = |l: f64| inner_minimize_with(p, l, minimizer);

    let l0 = start_lambda(p.a, p.b);
    let m0 = g(l0)?;
    let mut iterations = 1;
    if (m0.phi - r).abs() <= tol {
        return certify_hit(p, r, m0, iterations, opts);
    }
    // g is non-increasing: a larger multiplier lowers Φ(ŷ_λ).
    let toward = if m0.phi > r { p.b } else { p.a };
    let mut inner = m0;
    let mut outer = None;
    for k in 1..=MAX_EXPANSIONS {
        let l = probe_toward(l0, toward, k);
        if !p.contains(l) || l == inner.lambda {
            break;
        }
        let m = g(l)?;
        iterations += 1;
        if (m.phi - r).abs() <= tol {
            return certify_hit(p, r, m, iterations, opts);
        }
        if (m.phi > r) == (inner.phi > r) {
            inner = m;
        } else {
            outer = Some(m);
            break;
        }
    }
    let Some(outer) = outer else {
        return Err(PathError::NoBracket {
            r,
            last_lambda: inner.lambda,
            last_g: inner.phi,
        });
    };
    // lo has g > r, hi has g < r.
    let (mut lo, mut hi) = if inner.phi > r { (inner, outer) } else { (outer, inner) };
    let max_iter = opts.max_iter();
    for _ in 0..max_iter {
        let width = hi.lambda - lo.lambda;
        let floor = 4.0 * f64::EPSILON * 1f64.max(lo.lambda.abs()).max(hi.lambda.abs());
        if width.abs() < floor || direct_switch(p, &lo, &hi) {
            return certify_jump(p, r, lo, hi, iterations, opts);
        }
        let mid = 0.5 * (lo.lambda + hi.lambda);
        let m = g(mid)?;
        iterations += 1;
        if (m.phi - r).abs() <= tol {
            return certify_hit(p, r, m, iterations, opts);
        }
        if m.phi > r {
            lo = m;
        } else {
            hi = m;
        }
    }
    Err(PathError::MaxIter(max_iter))
}

fn tie_lambda(p: &MultiplierProblem, lo: &InnerMin, hi: &InnerMin) -> f64 {
    let t = (hi.j - lo.j) / (lo.phi - hi.phi);
    if t.is_finite() && p.contains(t) {
        t.clamp(lo.lambda.min(hi.lambda), lo.lambda.max(hi.lambda))
    } else {
        0.5 * (lo.lambda + hi.lambda)
    }
}

/// `true` when the two bracket minimizers tie at their crossing multiplier
/// and nothing else is lower there: the path jumps straight from one to the
/// other and further bisection cannot reach `{Φ = r}`.
fn direct_switch(p: &MultiplierProblem, lo: &InnerMin, hi: &InnerMin) -> bool {
    let t = tie_lambda(p, lo, hi);
    let v = lo.j + t * lo.phi;
    let m = p.lagrangian_min(t);
    v <= m + 1e-12 * (1.0 + v.abs())
}

fn cross_check(p: &MultiplierProblem, r: f64, j_value: f64, residual: f64, opts: &SolveOpts) -> CrossCheck {
    let band = residual.max(opts.bisect_tol(r));
    let direct_min =
        p.j.values()
            .iter()
            .zip(p.phi.values())
            .filter(|(_, &ph)| (ph - r).abs() <= band)
            .map(|(&j, _)| j)
            .fold(f64::INFINITY, f64::min);
    let cross_tol = opts.cross_tol.unwrap_or(1e-6 * (1.0 + j_value.abs()));
    let difference = (j_value - direct_min).abs();
    CrossCheck {
        band,
        direct_min,
        difference,
        cross_tol,
        passed: difference <= cross_tol,
    }
}

fn certify_hit(
    p: &MultiplierProblem,
    r: f64,
    m: InnerMin,
    iterations: usize,
    opts: &SolveOpts,
) -> Result<WellPosedCertificate, PathError> {
    let (lo, hi) = p.plateau(m.index);
    let lambda_hat = if lo.is_finite() && hi.is_finite() && lo <= m.lambda && m.lambda <= hi {
        0.5 * (lo + hi)
    } else {
        m.lambda
    };
    let residual = (m.phi - r).abs();
    Ok(WellPosedCertificate {
        r,
        lambda_hat,
        x_hat: m.point.clone(),
        j_value: m.j,
        phi_value: m.phi,
        phi_residual: residual,
        unique: true,
        dual_bound: p.lagrangian_min(lambda_hat) - lambda_hat * r,
        iterations,
        resolution: Resolution::Hit { plateau: [lo, hi] },
        cross_check: cross_check(p, r, m.j, residual, opts),
    })
}

fn certify_jump(
    p: &MultiplierProblem,
    r: f64,
    lo: InnerMin,
    hi: InnerMin,
    iterations: usize,
    opts: &SolveOpts,
) -> Result<WellPosedCertificate, PathError> {
    let lambda_hat = tie_lambda(p, &lo, &hi);
    let at_tie = p.minima_at(lambda_hat)?;
    if at_tie.len() >= 2 {
        return Err(PathError::NonUniqueMinimum {
            lambda: lambda_hat,
            points: at_tie.points,
        });
    }
    let x = if (lo.phi - r).abs() <= (hi.phi - r).abs() {
        &lo
    } else {
        &hi
    };
    let residual = (x.phi - r).abs();
    Ok(WellPosedCertificate {
        r,
        lambda_hat,
        x_hat: x.point.clone(),
        j_value: x.j,
        phi_value: x.phi,
        phi_residual: residual,
        unique: true,
        dual_bound: p.lagrangian_min(lambda_hat) - lambda_hat * r,
        iterations,
        resolution: Resolution::Jump {
            x_lo: lo.point.clone(),
            x_hi: hi.point.clone(),
            phi_lo: lo.phi,
            phi_hi: hi.phi,
        },
        cross_check: cross_check(p, r, x.j, residual, opts),
    })
}

/// Solves for every `r` independently; results keep the input order.
pub fn scan_constrained(
    p: &MultiplierProblem,
    rs: &[f64],
    opts: &SolveOpts,
) -> Vec<Result<WellPosedCertificate, PathError>> {
    rs.par_iter().map(|&r| solve_constrained(p, r, opts)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotonicityViolation {
    pub lambda: f64,
    pub mu: f64,
    pub g_lambda: f64,
    pub g_mu: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotonicityReport {
    /// `(λ, g(λ))` in grid order.
    pub g_table: Vec<(f64, f64)>,
    pub pairs_checked: usize,
    pub tol: f64,
    /// First pair `λ < μ` with `g(μ) > g(λ) + tol`.
    pub violation: Option<MonotonicityViolation>,
    /// Consecutive pairs with separated minimizers but `g(μ) >= g(λ)`.
    pub strict_violations: Vec<MonotonicityViolation>,
    pub passed: bool,
}

pub fn path_monotonicity_check(
    p: &MultiplierProblem,
    lambdas: &[f64],
    minimizer: &dyn InnerMinimizer,
) -> Result<MonotonicityReport, PathError> {
    if let Some(w) = lambdas.windows(2).find(|w| w[0] >= w[1]) {
        return Err(PathError::InvalidLambdaGrid(format!(
            "not strictly increasing at {} >= {}",
            w[0], w[1]
        )));
    }
    let mins: Vec<InnerMin> = lambdas
        .par_iter()
        .map(|&l| inner_minimize_with(p, l, minimizer))
        .collect::<Result<_, _>>()?;
    let scale = mins.iter().fold(0.0f64, |m, x| m.max(x.phi.abs()));
    let tol = 1e-9 * (1.0 + scale);
    let sep = p.tol.resolve(0.0, p.j.grid().spacing()).1;
    let viol = |a: &InnerMin, b: &InnerMin| MonotonicityViolation {
        lambda: a.lambda,
        mu: b.lambda,
        g_lambda: a.phi,
        g_mu: b.phi,
    };

    let mut violation = None;
    let mut best = 0usize;
    for j in 1..mins.len() {
        if mins[j].phi > mins[best].phi + tol {
            violation = Some(viol(&mins[best], &mins[j]));
            break;
        }
        if mins[j].phi < mins[best].phi {
            best = j;
        }
    }
    let strict_violations: Vec<MonotonicityViolation> = mins
        .windows(2)
        .filter(|w| distance(&w[0].point, &w[1].point) >= sep && w[1].phi >= w[0].phi)
        .map(|w| viol(&w[0], &w[1]))
        .collect();
    let n = mins.len();
    Ok(MonotonicityReport {
        g_table: mins.iter().map(|m| (m.lambda, m.phi)).collect(),
        pairs_checked: n * n.saturating_sub(1) / 2,
        tol,
        passed: violation.is_none() && strict_violations.is_empty(),
        violation,
        strict_violations,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DualCertificate {
    /// Multiplier `μ̂` of `J` in `Φ + μJ`.
    pub mu_hat: f64,
    pub gamma: ExtReal,
    pub delta: ExtReal,
    pub certificate: WellPosedCertificate,
}

/// Minimizes `Φ` on `{J = r}` via the swapped problem `Φ + μJ`,
/// `μ ∈ ]1/b, 1/a[`.
pub fn solve_dual(p: &MultiplierProblem, r: f64, opts: &SolveOpts) -> Result<DualCertificate, PathError> {
    if p.a < ExtReal::Finite(0.0) {
        return Err(PathError::DomainError(format!(
            "the dual problem needs a >= 0, got a = {}",
            p.a
        )));
    }
    let lo = p.b.recip_nonneg().expect("b > a >= 0");
    let hi = p.a.recip_nonneg().expect("a >= 0");
    let swapped = MultiplierProblem::new(p.phi.clone(), p.j.clone(), lo, hi)?.with_tol(p.tol)?;
    let ab = alpha_beta(&swapped)?;
    let certificate = solve_constrained(&swapped, r, opts)?;
    Ok(DualCertificate {
        mu_hat: certificate.lambda_hat,
        gamma: ab.alpha,
        delta: ab.beta,
        certificate,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitReport {
    /// `(λ, Φ(ŷ_λ))` for the λ's with a unique inner minimum.
    pub sequence: Vec<(f64, f64)>,
    /// First λ at which the inner minimum stopped being unique, if any.
    pub truncated_at: Option<f64>,
    pub limit: f64,
    pub inf_m_phi: f64,
    pub difference: f64,
    pub sup_phi: f64,
}

/// `lim_{λ→0+} Φ(ŷ_λ)` along `lambdas`, compared with `inf_M Φ` over the
/// global minima `M` of `J`. Defaults to `λ_k = 2^-k`, `k = 1..=40`.
pub fn limit_inf_phi(p: &MultiplierProblem, lambdas: Option<&[f64]>) -> Result<LimitReport, PathError> {
    if p.a != ExtReal::Finite(0.0) {
        return Err(PathError::DomainError(format!(
            "the limit needs a = 0, got a = {}",
            p.a
        )));
    }
    let default: Vec<f64> = (1..=40).map(|k| 0.5f64.powi(k)).collect();
    let lambdas = lambdas.unwrap_or(&default);
    if lambdas.windows(2).any(|w| w[1] >= w[0]) || lambdas.iter().any(|&l| l <= 0.0) {
        return Err(PathError::InvalidLambdaGrid(
            "expected a decreasing sequence of positive reals".into(),
        ));
    }
    let mut sequence = Vec::new();
    let mut truncated_at = None;
    for &l in lambdas {
        match inner_minimize(p, l) {
            Ok(m) => sequence.push((l, m.phi)),
            Err(PathError::NonUniqueMinimum { .. }) if !sequence.is_empty() => {
                truncated_at = Some(l);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let limit = sequence.last().map(|s| s.1).expect("non-empty sequence");
    let sup_phi = p.phi.max_value();
    let tol = 1e-9 * (1.0 + sup_phi.abs());
    if limit >= sup_phi - tol {
        return Err(PathError::HypothesisViolation(format!(
            "Φ(ŷ_λ) = {limit} reaches sup Φ = {sup_phi} as λ → 0+"
        )));
    }
    let m = minima_of_values(p.j.grid(), p.j.values(), p.tol, |_| true)?;
    let inf_m_phi = m.indices.iter().map(|&i| p.phi.value(i)).fold(f64::INFINITY, f64::min);
    Ok(LimitReport {
        sequence,
        truncated_at,
        limit,
        inf_m_phi,
        difference: (limit - inf_m_phi).abs(),
        sup_phi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use std::sync::Arc;

    fn problem(lo: f64, hi: f64, n: usize, j: &str, phi: &str, a: ExtReal, b: ExtReal) -> MultiplierProblem {
        let g = Arc::new(Grid::uniform_1d(lo, hi, n).unwrap());
        MultiplierProblem::new(
            ScalarField::from_expr(g.clone(), j).unwrap(),
            ScalarField::from_expr(g, phi).unwrap(),
            a,
            b,
        )
        .unwrap()
    }

    #[test]
    fn inner_minimum_of_linear_plus_quadratic() {
        let p = problem(
            -10.0,
            10.0,
            200_001,
            "x1",
            "x1^2",
            ExtReal::Finite(0.0),
            ExtReal::PosInf,
        );
        let m = inner_minimize(&p, 0.5).unwrap();
        assert_eq!(m.point, vec![-1.0]);
        assert_eq!(m.value, -0.5);
        assert!(matches!(inner_minimize(&p, -1.0), Err(PathError::OutOfInterval { .. })));
    }

    #[test]
    fn alpha_beta_with_double_well() {
        let p = problem(
            -2.0,
            2.0,
            4001,
            "(x1^2-1)^2",
            "x1",
            ExtReal::Finite(0.0),
            ExtReal::PosInf,
        );
        let ab = alpha_beta(&p).unwrap();
        assert_eq!(ab.alpha, ExtReal::Finite(-2.0));
        assert_eq!(ab.beta, ExtReal::Finite(-1.0));
        assert_eq!(ab.m_a.unwrap().points, vec![vec![-1.0], vec![1.0]]);
        assert!(ab.m_b.is_none());
    }

    #[test]
    fn quartic_constraint_with_infinite_interval() {
        let p = problem(-3.0, 3.0, 60_001, "x1^4", "x1", ExtReal::NegInf, ExtReal::PosInf);
        let c = solve_constrained(&p, 2.0, &SolveOpts::default()).unwrap();
        assert_eq!(c.x_hat, vec![2.0]);
        assert_eq!(c.j_value, 16.0);
        assert!((c.lambda_hat + 32.0).abs() < 1e-2, "λ̂ = {}", c.lambda_hat);
        assert!(c.cross_check.passed);
    }

    #[test]
    fn range_error_above_beta() {
        let p = problem(-10.0, 10.0, 2001, "x1", "x1^2", ExtReal::Finite(0.0), ExtReal::PosInf);
        let err = solve_constrained(&p, 101.0, &SolveOpts::default()).unwrap_err();
        assert!(matches!(err, PathError::RangeError { .. }));
    }

    #[test]
    fn dual_picks_negative_root() {
        let p = problem(-10.0, 10.0, 20_001, "x1^2", "x1", ExtReal::Finite(0.0), ExtReal::PosInf);
        let d = solve_dual(&p, 4.0, &SolveOpts::default()).unwrap();
        assert_eq!(d.certificate.x_hat, vec![-2.0]);
        assert!((d.mu_hat - 0.25).abs() < 1e-6);
        let neg = MultiplierProblem {
            a: ExtReal::Finite(-1.0),
            ..p
        };
        assert!(matches!(
            solve_dual(&neg, 4.0, &SolveOpts::default()),
            Err(PathError::DomainError(_))
        ));
    }

    #[test]
    fn limits_toward_zero() {
        let p = problem(
            -2.0,
            2.0,
            4001,
            "(x1^2-1)^2",
            "x1",
            ExtReal::Finite(0.0),
            ExtReal::PosInf,
        );
        let l = limit_inf_phi(&p, None).unwrap();
        assert_eq!(l.limit, -1.0);
        assert_eq!(l.inf_m_phi, -1.0);

        let q = problem(-10.0, 10.0, 2001, "x1", "x1^2", ExtReal::Finite(0.0), ExtReal::PosInf);
        assert!(matches!(
            limit_inf_phi(&q, None),
            Err(PathError::HypothesisViolation(_))
        ));
    }
}
