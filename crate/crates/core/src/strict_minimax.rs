//! The improvement-ratio infimum
//! `θ(φ, Ψ, J) = inf (J(x) − J(u)) / φ(Ψ(x, λ_u))` over `u ∈ M_J`,
//! `λ_x ≠ λ_u`, and the strict minimax gap it controls.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::error::FieldError;
use crate::ext_real::ExtReal;
use crate::field::ScalarField;
use crate::grid::{distance, lex_cmp, Grid};
use crate::minima::{minima_of_values, ClusterTol};
use crate::minimax::{bitsets, MinimaxError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThetaError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("invalid problem: {0}")]
    Invariant(String),
    #[error("μ = {mu} must exceed θ = {theta}")]
    MuNotAboveTheta { mu: f64, theta: ExtReal },
    #[error("cover is not weakly filtering: no member contains both x[{first}] and x[{second}]")]
    NotWeaklyFiltering { first: usize, second: usize },
    #[error("cover member {member} references x-index {index} outside the grid")]
    IndexOutOfRange { member: usize, index: usize },
    #[error("no strict gap exposed on the sampled Λ (lhs = {lhs}, rhs = {rhs})")]
    NoWitness { lhs: f64, rhs: f64 },
}

impl From<MinimaxError> for ThetaError {
    fn from(e: MinimaxError) -> Self {
        match e {
            MinimaxError::IndexOutOfRange { member, index } => ThetaError::IndexOutOfRange { member, index },
            MinimaxError::Field(f) => ThetaError::Field(f),
            other => ThetaError::Invariant(other.to_string()),
        }
    }
}

pub type PhiFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type PsiFn = Arc<dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync>;
pub type LambdaFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// `(J, φ, Ψ, x ↦ λ_x, y₀)` on a finite X-grid.
#[derive(Clone)]
pub struct ThetaProblem {
    pub j: ScalarField,
    pub phi: PhiFn,
    pub psi: PsiFn,
    pub lambda_map: LambdaFn,
    pub y0: Vec<f64>,
    /// Optional Y-samples on which `φ > 0` away from `y₀` is verified.
    pub y_grid: Option<Arc<Grid>>,
    pub tol: ClusterTol,
    lambdas: Vec<Vec<f64>>,
}

impl fmt::Debug for ThetaProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ThetaProblem")
            .field("j", &self.j)
            .field("y0", &self.y0)
            .finish_non_exhaustive()
    }
}

const INVARIANT_TOL: f64 = 1e-12;
/// Pairs whose denominator falls below this are skipped and counted.
pub const TINY_PHI: f64 = 1e-14;

impl ThetaProblem {
    pub fn new(
        j: ScalarField,
        phi: PhiFn,
        psi: PsiFn,
        lambda_map: LambdaFn,
        y0: Vec<f64>,
        y_grid: Option<Arc<Grid>>,
    ) -> Result<Self, ThetaError> {
        let grid = j.grid().clone();
        let lambdas: Vec<Vec<f64>> = grid.points().map(|x| lambda_map(x)).collect();
        let p = ThetaProblem {
            j,
            phi,
            psi,
            lambda_map,
            y0,
            y_grid,
            tol: ClusterTol::default(),
            lambdas,
        };
        p.validate()?;
        Ok(p)
    }

    /// The inner-product instantiation: `φ(y) = ‖y‖²`, `Ψ(x, λ) = Φ(x) − λ`,
    /// `λ_x = Φ(x)`, `y₀ = 0`.
    pub fn quadratic<F>(j: ScalarField, phi_map: F) -> Result<Self, ThetaError>
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        let phi_map: LambdaFn = Arc::new(phi_map);
        let dim = phi_map(j.grid().point(0)).len();
        let pm = phi_map.clone();
        ThetaProblem::new(
            j,
            Arc::new(|y: &[f64]| y.iter().map(|c| c * c).sum()),
            Arc::new(move |x: &[f64], l: &[f64]| pm(x).iter().zip(l).map(|(a, b)| a - b).collect()),
            phi_map,
            vec![0.0; dim],
            None,
        )
    }

    pub fn with_tol(mut self, tol: ClusterTol) -> Result<Self, ThetaError> {
        tol.validate()?;
        self.tol = tol;
        Ok(self)
    }

    fn validate(&self) -> Result<(), ThetaError> {
        let at_y0 = (self.phi)(&self.y0);
        if at_y0.abs() > INVARIANT_TOL {
            return Err(ThetaError::Invariant(format!("φ(y₀) = {at_y0}, expected 0")));
        }
        if let Some(yg) = &self.y_grid {
            for y in yg.points() {
                let v = (self.phi)(y);
                if v < 0.0 || (v <= INVARIANT_TOL && distance(y, &self.y0) > INVARIANT_TOL) {
                    return Err(ThetaError::Invariant(format!("φ({y:?}) = {v} but y ≠ y₀")));
                }
            }
        }
        let grid = self.j.grid();
        for (i, x) in grid.points().enumerate() {
            let y = (self.psi)(x, &self.lambdas[i]);
            if distance(&y, &self.y0) > 1e-9 * (1.0 + self.y0.iter().map(|c| c.abs()).sum::<f64>()) {
                return Err(ThetaError::Invariant(format!("Ψ(x, λ_x) = {y:?} ≠ y₀ at x = {x:?}")));
            }
        }
        if self.lambdas.windows(2).all(|w| w[0] == w[1]) {
            return Err(ThetaError::Invariant("x ↦ λ_x is constant".into()));
        }
        Ok(())
    }

    pub fn lambda_of(&self, i: usize) -> &[f64] {
        &self.lambdas[i]
    }

    /// `φ(Ψ(x_i, λ))`.
    pub fn penalty(&self, i: usize, lambda: &[f64]) -> f64 {
        (self.phi)(&(self.psi)(self.j.grid().point(i), lambda))
    }

    fn sep(&self) -> f64 {
        self.tol.resolve(0.0, self.j.grid().spacing()).1
    }

    fn minima(&self) -> Result<Vec<usize>, ThetaError> {
        Ok(minima_of_values(self.j.grid(), self.j.values(), self.tol, |_| true)?.indices)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThetaResult {
    pub theta: ExtReal,
    /// `(u, x)` attaining the infimum.
    pub argmin: Option<(Vec<f64>, Vec<f64>)>,
    /// Pairs with `λ_x ≠ λ_u` whose denominator was below `1e-14`.
    pub skipped: usize,
    pub pairs: usize,
    pub m_j: Vec<Vec<f64>>,
}

/// Smallest ratio with its `(x, u)` pair.
type Best = Option<(f64, usize, usize)>;

fn best_ratio(
    us: &[usize],
    n: usize,
    admissible: impl Fn(usize, usize) -> bool + Sync,
    ratio: impl Fn(usize, usize) -> (f64, f64) + Sync,
) -> (Best, usize, usize) {
    let per_x: Vec<(Best, usize, usize)> = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut best: Option<(f64, usize, usize)> = None;
            let (mut skipped, mut pairs) = (0, 0);
            for &u in us {
                if !admissible(u, x) {
                    continue;
                }
                let (num, den) = ratio(u, x);
                if den <= TINY_PHI {
                    skipped += 1;
                    continue;
                }
                pairs += 1;
                let q = num / den;
                if best.map_or(true, |b| q < b.0) {
                    best = Some((q, u, x));
                }
            }
            (best, skipped, pairs)
        })
        .collect();
    let mut best: Option<(f64, usize, usize)> = None;
    let (mut skipped, mut pairs) = (0, 0);
    for (b, s, p) in per_x {
        skipped += s;
        pairs += p;
        if let Some(b) = b {
            if best.map_or(true, |c| b.0 < c.0) {
                best = Some(b);
            }
        }
    }
    (best, skipped, pairs)
}

fn finish(grid: &Grid, us: &[usize], found: (Option<(f64, usize, usize)>, usize, usize)) -> ThetaResult {
    let (best, skipped, pairs) = found;
    ThetaResult {
        theta: best.map_or(ExtReal::PosInf, |b| ExtReal::Finite(b.0)),
        argmin: best.map(|(_, u, x)| (grid.point(u).to_vec(), grid.point(x).to_vec())),
        skipped,
        pairs,
        m_j: us.iter().map(|&u| grid.point(u).to_vec()).collect(),
    }
}

pub fn theta(p: &ThetaProblem) -> Result<ThetaResult, ThetaError> {
    let us = p.minima()?;
    let sep = p.sep();
    let jv = p.j.values();
    let found = best_ratio(
        &us,
        jv.len(),
        |u, x| distance(p.lambda_of(x), p.lambda_of(u)) >= sep,
        |u, x| (jv[x] - jv[u], p.penalty(x, p.lambda_of(u))),
    );
    Ok(finish(p.j.grid(), &us, found))
}

/// `inf (J(x) − J(u)) / ‖Φ(x) − Φ(u)‖²` over `u ∈ M_J`, `Φ(x) ≠ Φ(u)`.
pub fn theta_quadratic<F>(j: &ScalarField, phi_map: F, tol: ClusterTol) -> Result<ThetaResult, ThetaError>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    let grid = j.grid();
    let us = minima_of_values(grid, j.values(), tol, |_| true)?.indices;
    let sep = tol.resolve(0.0, grid.spacing()).1;
    let images: Vec<Vec<f64>> = grid.points().map(&phi_map).collect();
    let jv = j.values();
    let found = best_ratio(
        &us,
        jv.len(),
        |u, x| distance(&images[x], &images[u]) >= sep,
        |u, x| {
            let d: f64 = images[x].iter().zip(&images[u]).map(|(a, b)| (a - b) * (a - b)).sum();
            (jv[x] - jv[u], d)
        },
    );
    Ok(finish(grid, &us, found))
}

/// Checks that every pair of x-indices shares a member of `cover`.
pub fn validate_weakly_filtering(n: usize, cover: &[Vec<usize>]) -> Result<(), ThetaError> {
    let sets = bitsets(n, cover)?;
    // memberships[x] = members containing x, as a bitset over members.
    let words = cover.len().div_ceil(64);
    let mut memberships = vec![vec![0u64; words]; n];
    for (k, s) in sets.iter().enumerate() {
        for (x, m) in memberships.iter_mut().enumerate() {
            if s[x / 64] >> (x % 64) & 1 == 1 {
                m[k / 64] |= 1 << (k % 64);
            }
        }
    }
    for a in 0..n {
        for b in a..n {
            if !memberships[a].iter().zip(&memberships[b]).any(|(p, q)| p & q != 0) {
                return Err(ThetaError::NotWeaklyFiltering { first: a, second: b });
            }
        }
    }
    Ok(())
}

/// Both sides of the strict inequality on one member `A`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapSides {
    pub member: usize,
    /// `sup_{λ ∈ D} inf_{x ∈ A} (J(x) − μφ(Ψ(x, λ)))`.
    pub lhs: f64,
    /// `inf_{x ∈ A} sup_{z ∈ A} (J(x) − μφ(Ψ(x, λ_z)))`.
    pub rhs: f64,
    pub lambda_samples: usize,
}

/// `D = {λ_x : x ∈ A}`, plus midpoints between consecutive values when Λ is
/// one-dimensional.
fn lambda_samples(p: &ThetaProblem, member: &[usize]) -> Vec<Vec<f64>> {
    let mut d: Vec<Vec<f64>> = member.iter().map(|&x| p.lambda_of(x).to_vec()).collect();
    d.sort_by(|a, b| lex_cmp(a, b));
    d.dedup();
    if d.first().is_some_and(|l| l.len() == 1) {
        let mids: Vec<Vec<f64>> = d.windows(2).map(|w| vec![0.5 * (w[0][0] + w[1][0])]).collect();
        d.extend(mids);
        d.sort_by(|a, b| lex_cmp(a, b));
    }
    d
}

fn gap_sides(p: &ThetaProblem, mu: f64, member: &[usize], index: usize) -> GapSides {
    let jv = p.j.values();
    let d = lambda_samples(p, member);
    let lhs = d
        .par_iter()
        .map(|l| {
            member
                .iter()
                .map(|&x| jv[x] - mu * p.penalty(x, l))
                .fold(f64::INFINITY, f64::min)
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    let rhs = member
        .par_iter()
        .map(|&x| {
            member
                .iter()
                .map(|&z| jv[x] - mu * p.penalty(x, p.lambda_of(z)))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    GapSides {
        member: index,
        lhs,
        rhs,
        lambda_samples: d.len(),
    }
}

fn gap_tol(rhs: f64) -> f64 {
    1e-12 * (1.0 + rhs.abs())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapWitness {
    pub theta: ExtReal,
    pub mu: f64,
    pub u: Vec<f64>,
    pub x1: Vec<f64>,
    pub sides: GapSides,
}

/// Exhibits a member `A` of a weakly filtering cover on which the strict
/// inequality `lhs < rhs` holds for `μ > θ`.
pub fn strict_gap_witness(p: &ThetaProblem, mu: f64, cover: &[Vec<usize>]) -> Result<GapWitness, ThetaError> {
    let th = theta(p)?;
    if !(ExtReal::Finite(mu) > th.theta) {
        return Err(ThetaError::MuNotAboveTheta { mu, theta: th.theta });
    }
    let n = p.j.len();
    validate_weakly_filtering(n, cover)?;
    let us = p.minima()?;
    let sep = p.sep();
    let jv = p.j.values();
    // The most improving pair: J(x1) − μφ(Ψ(x1, λ_u)) − J(u), most negative.
    let mut best: Option<(f64, usize, usize)> = None;
    for &u in &us {
        for x in 0..n {
            if distance(p.lambda_of(x), p.lambda_of(u)) < sep {
                continue;
            }
            let s = jv[x] - mu * p.penalty(x, p.lambda_of(u)) - jv[u];
            if s < 0.0 && best.map_or(true, |b| s < b.0) {
                best = Some((s, u, x));
            }
        }
    }
    let Some((_, u, x1)) = best else {
        return Err(ThetaError::NoWitness {
            lhs: f64::NAN,
            rhs: f64::NAN,
        });
    };
    let k = cover
        .iter()
        .position(|m| m.contains(&u) && m.contains(&x1))
        .expect("weakly filtering cover contains every pair");
    let sides = gap_sides(p, mu, &cover[k], k);
    if !(sides.lhs < sides.rhs - gap_tol(sides.rhs)) {
        return Err(ThetaError::NoWitness {
            lhs: sides.lhs,
            rhs: sides.rhs,
        });
    }
    let grid = p.j.grid();
    Ok(GapWitness {
        theta: th.theta,
        mu,
        u: grid.point(u).to_vec(),
        x1: grid.point(x1).to_vec(),
        sides,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LowerBoundCheck {
    pub mu: f64,
    /// `lhs >= rhs` on every member, hence `θ >= μ`.
    pub holds: bool,
    pub members: Vec<GapSides>,
}

/// The reverse inequality on every member of a weakly filtering cover,
/// which forces `θ >= μ`.
pub fn check_theta_lower_bound(p: &ThetaProblem, mu: f64, cover: &[Vec<usize>]) -> Result<LowerBoundCheck, ThetaError> {
    validate_weakly_filtering(p.j.len(), cover)?;
    let members: Vec<GapSides> = cover.iter().enumerate().map(|(k, m)| gap_sides(p, mu, m, k)).collect();
    Ok(LowerBoundCheck {
        mu,
        holds: members.iter().all(|s| s.lhs >= s.rhs - gap_tol(s.rhs)),
        members,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RemarkChecks {
    /// For every grid point `v`: `v ∈ M_J` iff `v` minimizes
    /// `x ↦ J(x) − θφ(Ψ(x, λ_v))`.
    pub minimality_equivalence: bool,
    pub equivalence_failures: Vec<Vec<f64>>,
    /// `θ > 0` implies `λ` constant on `M_J`.
    pub lambda_constant_on_minima: bool,
}

pub fn remark_checks(p: &ThetaProblem, theta: ExtReal) -> Result<RemarkChecks, ThetaError> {
    let grid = p.j.grid();
    let m = minima_of_values(grid, p.j.values(), p.tol, |_| true)?;
    let in_m: Vec<bool> = (0..p.j.len()).map(|i| p.j.value(i) <= m.value + m.tol_val).collect();
    let jv = p.j.values();
    let equivalence_failures: Vec<Vec<f64>> = match theta {
        ExtReal::Finite(t) => (0..jv.len())
            .into_par_iter()
            .filter_map(|v| {
                let lv = p.lambda_of(v);
                let h: Vec<f64> = (0..jv.len()).map(|x| jv[x] - t * p.penalty(x, lv)).collect();
                let min = h.iter().copied().fold(f64::INFINITY, f64::min);
                let is_min = h[v] <= min + p.tol.resolve(min, grid.spacing()).0;
                (is_min != in_m[v]).then(|| grid.point(v).to_vec())
            })
            .collect(),
        _ => Vec::new(),
    };
    let sep = p.sep();
    let lambda_constant_on_minima = match theta {
        ExtReal::Finite(t) if t <= 0.0 => true,
        ExtReal::NegInf => true,
        _ => {
            let first = p.lambda_of(m.indices[0]);
            m.indices.iter().all(|&u| distance(p.lambda_of(u), first) < sep)
        }
    };
    Ok(RemarkChecks {
        minimality_equivalence: equivalence_failures.is_empty(),
        equivalence_failures,
        lambda_constant_on_minima,
    })
}
