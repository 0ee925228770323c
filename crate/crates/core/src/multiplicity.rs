//! Detectors for functions with several global minima: the slope condition
//! (b₁), two-minima multipliers λ*, sublevel radii ρ*, farthest-point ties
//! and the three-solution finder for `J′(x) − μx = y`.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::error::FieldError;
use crate::ext_real::ExtReal;
use crate::field::ScalarField;
use crate::grid::{distance, Grid};
use crate::minima::{minima_of_values, ClusterTol, MinimaCluster};
use crate::strict_minimax::{theta_quadratic, ThetaError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MultiplicityError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Theta(#[from] ThetaError),
    #[error("ordering precondition violated: need Φ(u1) = {phi_u1} < ρ = {rho} < Φ(u2) = {phi_u2}")]
    Ordering { phi_u1: f64, rho: f64, phi_u2: f64 },
    #[error("ρ = {rho} is not inside ]inf Φ, sup Φ[ = ]{inf}, {sup}[")]
    RhoOutOfRange { rho: f64, inf: f64, sup: f64 },
    #[error("point {0:?} is not on the grid")]
    OffGrid(Vec<f64>),
    #[error("μ = {mu} is outside ]2θ, 2η[ = ]{lo}, {hi}[")]
    RangeError { mu: f64, lo: ExtReal, hi: ExtReal },
    #[error("no two-minima multiplier in the scanned range")]
    NoLambdaStar,
    #[error("found {} sign-change roots for y_μ = {y_mu}, need 3 (grid too coarse?)", roots.len())]
    RootCountShortfall {
        y_mu: f64,
        roots: Vec<f64>,
        sign_changes: usize,
    },
    #[error("need at least 2 distinct points, got {0}")]
    TooFewPoints(usize),
    #[error("points must share one dimension")]
    DimensionMismatch,
    #[error("hull lattice would need {0} points, above the cap of {MAX_LATTICE}")]
    LatticeTooLarge(u128),
    #[error("invalid scan: {0}")]
    InvalidScan(String),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FindingContext {
    B1,
    RhoScan {
        rho_star: f64,
    },
    ThreeSolutions {
        y_mu: f64,
        roots: Vec<f64>,
        theta: ExtReal,
        eta: ExtReal,
        /// `|x| >= shell` is the region used for the η estimate.
        shell: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MultiplicityFinding {
    pub lambda_star: Option<f64>,
    pub minima: MinimaCluster,
    pub context: FindingContext,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct B1Check {
    pub holds: bool,
    pub rho: f64,
    /// `inf J` over `{Φ <= ρ}`.
    pub inf_sublevel: f64,
    pub lhs: f64,
    pub rhs: f64,
}

fn at(field: &ScalarField, u: &[f64]) -> Result<f64, MultiplicityError> {
    field.eval_at(u).ok_or_else(|| MultiplicityError::OffGrid(u.to_vec()))
}

fn check_rho(phi: &ScalarField, rho: f64) -> Result<(), MultiplicityError> {
    let (inf, sup) = (phi.min_value(), phi.max_value());
    if !(inf < rho && rho < sup) {
        return Err(MultiplicityError::RhoOutOfRange { rho, inf, sup });
    }
    Ok(())
}

fn inf_sublevel(j: &ScalarField, phi: &ScalarField, rho: f64) -> f64 {
    j.values()
        .iter()
        .zip(phi.values())
        .filter(|(_, &p)| p <= rho)
        .map(|(&v, _)| v)
        .fold(f64::INFINITY, f64::min)
}

/// Evaluates the (b₁) slope inequality at `(ρ, u1, u2)` as written.
pub fn check_b1(
    j: &ScalarField,
    phi: &ScalarField,
    rho: f64,
    u1: &[f64],
    u2: &[f64],
) -> Result<B1Check, MultiplicityError> {
    if !j.same_domain(phi) {
        return Err(FieldError::DomainMismatch.into());
    }
    check_rho(phi, rho)?;
    let (p1, p2) = (at(phi, u1)?, at(phi, u2)?);
    if !(p1 < rho && rho < p2) {
        return Err(MultiplicityError::Ordering {
            phi_u1: p1,
            rho,
            phi_u2: p2,
        });
    }
    let m = inf_sublevel(j, phi, rho);
    let lhs = (at(j, u1)? - m) / (rho - p1);
    let rhs = (at(j, u2)? - m) / (rho - p2);
    Ok(B1Check {
        holds: lhs < rhs,
        rho,
        inf_sublevel: m,
        lhs,
        rhs,
    })
}

/// Both sides of `sup_{λ>0} inf_X (J + λ(Φ−ρ)) < inf_X sup_{λ>0} (J + λ(Φ−ρ))`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct B1Minimax {
    pub sup_inf: f64,
    pub inf_sup: f64,
    /// The λ-grid the outer sup ran over.
    pub lambdas: Vec<f64>,
    pub gap: bool,
}

/// The λ-bracket on which the outer sup is exact for gap detection: `0` and
/// every slope ratio `(J_i − m)/(ρ − Φ_i)`, `Φ_i ≠ ρ`, that is positive.
pub fn b1_lambda_candidates(j: &ScalarField, phi: &ScalarField, rho: f64) -> Vec<f64> {
    let m = inf_sublevel(j, phi, rho);
    let mut ls = vec![0.0];
    for (&v, &p) in j.values().iter().zip(phi.values()) {
        if p != rho {
            let l = (v - m) / (rho - p);
            if l > 0.0 && l.is_finite() {
                ls.push(l);
            }
        }
    }
    ls.sort_by(f64::total_cmp);
    ls.dedup();
    ls
}

pub fn b1_minimax(j: &ScalarField, phi: &ScalarField, rho: f64) -> Result<B1Minimax, MultiplicityError> {
    if !j.same_domain(phi) {
        return Err(FieldError::DomainMismatch.into());
    }
    check_rho(phi, rho)?;
    // sup over λ > 0 of J(x) + λ(Φ(x) − ρ) is J(x) on {Φ <= ρ} and +∞ elsewhere.
    let inf_sup = inf_sublevel(j, phi, rho);
    let lambdas = b1_lambda_candidates(j, phi, rho);
    let sup_inf = lambdas
        .par_iter()
        .map(|&l| {
            j.values()
                .iter()
                .zip(phi.values())
                .map(|(&v, &p)| v + l * (p - rho))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);
    Ok(B1Minimax {
        sup_inf,
        inf_sup,
        gap: sup_inf < inf_sup - 1e-12 * (1.0 + inf_sup.abs()),
        lambdas,
    })
}

/// A tie of two distant global minima in the affine family `a + λb`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TieEvent {
    pub lambda: f64,
    pub left: usize,
    pub right: usize,
    pub minima: MinimaCluster,
}

fn affine_values(a: &[f64], b: &[f64], l: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + l * y).collect()
}

fn affine_argmin(a: &[f64], b: &[f64], l: f64) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, (x, y)) in a.iter().zip(b).enumerate() {
        let v = x + l * y;
        if v < best.1 {
            best = (i, v);
        }
    }
    best
}

/// All λ in the scan range at which `x ↦ a_x + λ b_x` has two global minima
/// farther apart than `tol_sep`, sorted by λ.
///
/// Argmins are tabulated on the scan; each bracket whose argmins are far apart
/// is resolved exactly by intersecting the two leading lines, recursing on
/// any third line that undercuts the intersection.
pub fn affine_tie_events(
    grid: &Grid,
    a: &[f64],
    b: &[f64],
    scan: &[f64],
    tol: ClusterTol,
) -> Result<Vec<TieEvent>, MultiplicityError> {
    tol.validate()?;
    if a.len() != grid.len() || b.len() != grid.len() {
        return Err(FieldError::LengthMismatch {
            expected: grid.len(),
            got: a.len().min(b.len()),
        }
        .into());
    }
    if scan.len() < 2 || scan.windows(2).any(|w| !(w[0] < w[1])) || scan.iter().any(|l| !l.is_finite()) {
        return Err(MultiplicityError::InvalidScan(
            "scan must be finite, strictly increasing, length >= 2".into(),
        ));
    }
    let sep = tol.resolve(0.0, grid.spacing()).1;
    let argmins: Vec<usize> = scan.par_iter().map(|&l| affine_argmin(a, b, l).0).collect();
    let mut events = Vec::new();
    let mut stack: Vec<(f64, f64, usize, usize)> = scan
        .windows(2)
        .zip(argmins.windows(2))
        .map(|(l, i)| (l[0], l[1], i[0], i[1]))
        .collect();
    stack.reverse();
    let value = |i: usize, l: f64| a[i] + l * b[i];
    while let Some((lo, hi, il, ih)) = stack.pop() {
        if distance(grid.point(il), grid.point(ih)) <= sep {
            continue;
        }
        let lt = if b[il] == b[ih] {
            lo
        } else {
            ((a[ih] - a[il]) / (b[il] - b[ih])).clamp(lo, hi)
        };
        let (m, vm) = affine_argmin(a, b, lt);
        let tie = value(il, lt).max(value(ih, lt));
        let tol_val = tol.resolve(vm, grid.spacing()).0;
        if tie <= vm + tol_val {
            let spread = (value(il, lt) - value(ih, lt)).abs();
            let ctol = ClusterTol {
                tol_val: Some(tol_val.max(spread + (tie - vm))),
                tol_sep: Some(sep),
            };
            let minima = minima_of_values(grid, &affine_values(a, b, lt), ctol, |_| true)?;
            events.push(TieEvent {
                lambda: lt,
                left: il,
                right: ih,
                minima,
            });
        } else if m != il && m != ih {
            // Push the right half first so brackets pop in λ order.
            stack.push((lt, hi, m, ih));
            stack.push((lo, lt, il, m));
        }
    }
    events.sort_by(|x, y| x.lambda.total_cmp(&y.lambda));
    events.dedup_by(|x, y| x.lambda == y.lambda);
    Ok(events)
}

/// The first λ on `lambda_scan` at which `J + λΦ` has two distant global minima.
pub fn find_lambda_star(
    j: &ScalarField,
    phi: &ScalarField,
    lambda_scan: &[f64],
    tol: ClusterTol,
) -> Result<Option<MultiplicityFinding>, MultiplicityError> {
    if !j.same_domain(phi) {
        return Err(FieldError::DomainMismatch.into());
    }
    let events = affine_tie_events(j.grid(), j.values(), phi.values(), lambda_scan, tol)?;
    Ok(events.into_iter().next().map(|e| MultiplicityFinding {
        lambda_star: Some(e.lambda),
        minima: e.minima,
        context: FindingContext::B1,
    }))
}

/// Global minima of `values` restricted to `{Φ <= ρ}`.
pub fn restricted_minima(
    values: &[f64],
    phi: &ScalarField,
    rho: f64,
    tol: ClusterTol,
) -> Result<MinimaCluster, MultiplicityError> {
    let pv = phi.values();
    Ok(minima_of_values(phi.grid(), values, tol, |i| pv[i] <= rho)?)
}

/// Scans `ρ` for the sublevel radius at which `F + Φ` restricted to
/// `{Φ <= ρ}` acquires a second, distant global minimum.
///
/// Sublevel sets only change at Φ-values of grid points, so each bracket is
/// refined by bisection over the sorted Φ-values inside it, which lands on
/// the exact switching threshold. With `all_events` every switch is
/// reported, otherwise only the first.
pub fn scan_rho_star(
    f: &ScalarField,
    phi: &ScalarField,
    rho_grid: &[f64],
    tol: ClusterTol,
    all_events: bool,
) -> Result<Vec<MultiplicityFinding>, MultiplicityError> {
    if !f.same_domain(phi) {
        return Err(FieldError::DomainMismatch.into());
    }
    tol.validate()?;
    if rho_grid.windows(2).any(|w| !(w[0] < w[1])) || rho_grid.iter().any(|r| !r.is_finite()) {
        return Err(MultiplicityError::InvalidScan(
            "ρ-grid must be finite and strictly increasing".into(),
        ));
    }
    let grid = f.grid();
    let sep = tol.resolve(0.0, grid.spacing()).1;
    let total: Vec<f64> = f.values().iter().zip(phi.values()).map(|(a, b)| a + b).collect();
    let inf_phi = phi.min_value();
    let rhos: Vec<f64> = rho_grid.iter().copied().filter(|&r| r >= inf_phi).collect();
    let states: Vec<MinimaCluster> = rhos
        .par_iter()
        .map(|&r| restricted_minima(&total, phi, r, tol))
        .collect::<Result<_, _>>()?;

    let mut levels: Vec<f64> = phi.values().to_vec();
    levels.sort_by(f64::total_cmp);
    levels.dedup();

    let far_from = |c: &MinimaCluster, p: &[f64]| c.points.iter().any(|q| distance(q, p) > sep);
    let mut out = Vec::new();
    for k in 0..states.len() {
        let hit = if states[k].len() >= 2 {
            Some((rhos[k], states[k].clone()))
        } else if k > 0 && states[k - 1].is_unique() && far_from(&states[k], &states[k - 1].points[0]) {
            let anchor = states[k - 1].points[0].clone();
            // Discrete bisection over the Φ-levels in ]ρ_{k−1}, ρ_k].
            let mut lo = levels.partition_point(|&v| v <= rhos[k - 1]);
            let mut hi = levels.partition_point(|&v| v <= rhos[k]) - 1;
            while lo < hi {
                let mid = lo + (hi - lo) / 2;
                let c = restricted_minima(&total, phi, levels[mid], tol)?;
                if c.len() >= 2 || far_from(&c, &anchor) {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            let rho = levels[lo];
            let mut c = restricted_minima(&total, phi, rho, tol)?;
            if c.is_unique() {
                // No exact grid tie: widen tol_val to the drop at the switch so
                // both the old and the new leader are reported.
                let ia = grid.locate(&anchor, 0.0).expect("anchor is a grid point");
                let drop = total[ia] - c.value;
                c = restricted_minima(
                    &total,
                    phi,
                    rho,
                    ClusterTol {
                        tol_val: Some(c.tol_val.max(drop * (1.0 + 1e-12))),
                        tol_sep: Some(sep),
                    },
                )?;
            }
            Some((rho, c))
        } else {
            None
        };
        if let Some((rho, minima)) = hit {
            if out
                .last()
                .is_some_and(|m: &MultiplicityFinding| m.context == FindingContext::RhoScan { rho_star: rho })
            {
                continue;
            }
            out.push(MultiplicityFinding {
                lambda_star: None,
                minima,
                context: FindingContext::RhoScan { rho_star: rho },
            });
            if !all_events {
                break;
            }
        }
    }
    Ok(out)
}

/// A hull point whose farthest points in the set are tied.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FarthestTie {
    pub point: Vec<f64>,
    /// Barycentric weights on the deduplicated input points.
    pub weights: Vec<f64>,
    pub farthest_distance: f64,
    /// Farthest minus second-farthest distance at `point`.
    pub tie_gap: f64,
    pub tie_tol: f64,
    /// Indices (into the deduplicated points) within `tie_tol` of the farthest distance.
    pub tied: Vec<usize>,
    pub tied_points: Vec<Vec<f64>>,
    pub lattice_size: usize,
}

pub const MAX_LATTICE: u128 = 20_000_000;

fn lattice_size(n: usize, k: usize) -> u128 {
    // C(n + k − 1, k − 1), saturating.
    let mut c: u128 = 1;
    for i in 1..k as u128 {
        c = c.saturating_mul(n as u128 + i) / i;
        if c > MAX_LATTICE * 16 {
            return c;
        }
    }
    c
}

/// Visits every composition of `n` into `k` non-negative parts.
fn compositions(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(rest: usize, slot: usize, parts: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if slot + 1 == parts.len() {
            parts[slot] = rest;
            f(parts);
            return;
        }
        for v in (0..=rest).rev() {
            parts[slot] = v;
            rec(rest - v, slot + 1, parts, f);
        }
    }
    let mut parts = vec![0; k];
    rec(n, 0, &mut parts, f);
}

/// Searches the barycentric lattice of resolution `hull_grid_n` over
/// `conv(points)` for the point whose two largest distances to the set are
/// closest.
pub fn farthest_tie_point(points: &[Vec<f64>], hull_grid_n: usize) -> Result<FarthestTie, MultiplicityError> {
    let dim = points.first().map_or(0, |p| p.len());
    if points
        .iter()
        .any(|p| p.len() != dim || p.iter().any(|c| !c.is_finite()))
    {
        return Err(MultiplicityError::DimensionMismatch);
    }
    let mut pts: Vec<Vec<f64>> = Vec::new();
    for p in points {
        if !pts.contains(p) {
            pts.push(p.clone());
        }
    }
    if pts.len() < 2 {
        return Err(MultiplicityError::TooFewPoints(pts.len()));
    }
    if hull_grid_n < 1 {
        return Err(MultiplicityError::InvalidScan("hull_grid_n must be positive".into()));
    }
    let k = pts.len();
    let size = lattice_size(hull_grid_n, k);
    if size > MAX_LATTICE {
        return Err(MultiplicityError::LatticeTooLarge(size));
    }
    let n = hull_grid_n as f64;
    let mut best: Option<(f64, f64, Vec<usize>)> = None;
    let mut y = vec![0.0; dim];
    let mut d = vec![0.0; k];
    compositions(hull_grid_n, k, &mut |parts| {
        y.iter_mut().for_each(|c| *c = 0.0);
        for (w, p) in parts.iter().zip(&pts) {
            if *w > 0 {
                let w = *w as f64 / n;
                for (c, pc) in y.iter_mut().zip(p) {
                    *c += w * pc;
                }
            }
        }
        for (dd, p) in d.iter_mut().zip(&pts) {
            *dd = distance(&y, p);
        }
        let (mut d1, mut d2) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for &v in &d {
            if v > d1 {
                d2 = d1;
                d1 = v;
            } else if v > d2 {
                d2 = v;
            }
        }
        let gap = d1 - d2;
        // Smaller gap wins; among equal gaps the smaller farthest distance.
        if best.as_ref().map_or(true, |b| gap < b.0 || (gap == b.0 && d1 < b.1)) {
            best = Some((gap, d1, parts.to_vec()));
        }
    });
    let (gap, d1, parts) = best.expect("lattice is non-empty");
    let weights: Vec<f64> = parts.iter().map(|&w| w as f64 / n).collect();
    let mut point = vec![0.0; dim];
    for (w, p) in weights.iter().zip(&pts) {
        if *w > 0.0 {
            for (c, pc) in point.iter_mut().zip(p) {
                *c += w * pc;
            }
        }
    }
    let tie_tol = gap.max(1e-12 * (1.0 + d1)) * (1.0 + 1e-9);
    let tied: Vec<usize> = (0..k).filter(|&i| distance(&point, &pts[i]) >= d1 - tie_tol).collect();
    Ok(FarthestTie {
        tied_points: tied.iter().map(|&i| pts[i].clone()).collect(),
        point,
        weights,
        farthest_distance: d1,
        tie_gap: gap,
        tie_tol,
        tied,
        lattice_size: size as usize,
    })
}

/// `min J(x)/x²` over the outer 10% of the grid's radius; returns `(η, shell)`.
pub fn eta_estimate(j: &ScalarField) -> (ExtReal, f64) {
    let grid = j.grid();
    let radius = grid.points().map(|p| p[0].abs()).fold(0.0, f64::max);
    let shell = 0.9 * radius;
    let eta = grid
        .points()
        .enumerate()
        .filter(|(_, p)| p[0].abs() >= shell && p[0] != 0.0)
        .map(|(i, p)| j.value(i) / (p[0] * p[0]))
        .fold(f64::INFINITY, f64::min);
    (ExtReal::from_f64(eta).unwrap_or(ExtReal::PosInf), shell)
}

/// `J′` by central differences with step equal to the grid spacing.
fn derivative(j: &ScalarField) -> Vec<f64> {
    let xs = j.grid().coords_1d().expect("1-D grid");
    let h = j.grid().spacing();
    match j.evaluator() {
        Some(f) => xs.iter().map(|&x| (f(&[x + h]) - f(&[x - h])) / (2.0 * h)).collect(),
        None => {
            let v = j.values();
            let n = v.len();
            (0..n)
                .map(|i| {
                    let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
                    (v[b] - v[a]) / (xs[b] - xs[a])
                })
                .collect()
        }
    }
}

const DEAD_BAND: f64 = 1e-12;

/// Roots of `d` located by strict sign alternation, linearly interpolated.
pub fn sign_change_roots(xs: &[f64], d: &[f64]) -> Vec<f64> {
    let mut roots = Vec::new();
    let mut last: Option<(f64, f64)> = None;
    for (&x, &v) in xs.iter().zip(d) {
        if v.abs() <= DEAD_BAND {
            continue;
        }
        if let Some((xp, vp)) = last {
            if vp.signum() != v.signum() {
                roots.push(xp + (x - xp) * vp / (vp - v));
            }
        }
        last = Some((x, v));
    }
    roots
}

/// Finds `y_μ` with at least three solutions of `J′(x) − μx = y_μ` on a 1-D grid.
///
/// `y_μ = −μλ*` where `λ*` is a two-minima multiplier of
/// `x ↦ J(x) − (μ/2)(x − λ)²`, whose critical points solve `J′(x) − μx = −μλ`.
pub fn three_solutions_1d(
    j: &ScalarField,
    mu: f64,
    lambda_scan: &[f64],
    tol: ClusterTol,
) -> Result<MultiplicityFinding, MultiplicityError> {
    let grid = j.grid();
    let Some(xs) = grid.coords_1d() else {
        return Err(FieldError::InvalidGrid("three_solutions_1d needs a 1-D grid".into()).into());
    };
    let theta = theta_quadratic(j, |x| x.to_vec(), tol)?.theta;
    let (eta, shell) = eta_estimate(j);
    let lo = match theta {
        ExtReal::Finite(t) => ExtReal::Finite(2.0 * t),
        other => other,
    };
    let hi = match eta {
        ExtReal::Finite(e) => ExtReal::Finite(2.0 * e),
        other => other,
    };
    if !ExtReal::open_contains(lo, hi, mu) {
        return Err(MultiplicityError::RangeError { mu, lo, hi });
    }
    // J(x) − (μ/2)(x−λ)² = (J(x) − μx²/2) + λ·μx − μλ²/2; the last term is
    // constant in x.
    let a: Vec<f64> = xs.iter().zip(j.values()).map(|(&x, &v)| v - 0.5 * mu * x * x).collect();
    let b: Vec<f64> = xs.iter().map(|&x| mu * x).collect();
    let events = affine_tie_events(grid, &a, &b, lambda_scan, tol)?;
    let event = events.into_iter().next().ok_or(MultiplicityError::NoLambdaStar)?;
    let y_mu = -mu * event.lambda;

    let dj = derivative(j);
    let residual: Vec<f64> = xs.iter().zip(&dj).map(|(&x, &d)| d - mu * x - y_mu).collect();
    let sep = tol.resolve(0.0, grid.spacing()).1;
    let raw = sign_change_roots(xs, &residual);
    let mut roots: Vec<f64> = Vec::new();
    for r in &raw {
        if roots.last().map_or(true, |&p| r - p >= sep) {
            roots.push(*r);
        }
    }
    if roots.len() < 3 {
        return Err(MultiplicityError::RootCountShortfall {
            y_mu,
            roots,
            sign_changes: raw.len(),
        });
    }
    Ok(MultiplicityFinding {
        lambda_star: Some(event.lambda),
        minima: event.minima,
        context: FindingContext::ThreeSolutions {
            y_mu,
            roots,
            theta,
            eta,
            shell,
        },
    })
}
