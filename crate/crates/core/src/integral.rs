//! Weighted finite-atom versions of the constrained integral identity
//! `inf Σγ_t φ(u_t) over Σγ_t ψ(u_t) <= rΣγ  =  (inf_{ψ=r} φ)·Σγ` and of the
//! Jensen-type inequality `Σγ f(u) <= f((Σγ|u|^p / Σγ)^{1/p})·Σγ`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::FieldError;
use crate::ext_real::ExtReal;
use crate::field::ScalarField;
use crate::multiplier_path::{alpha_beta, solve_constrained, MultiplierProblem, PathError, SolveOpts};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegralError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error("invalid weighted space: {0}")]
    InvalidSpace(String),
    #[error("r = {r} is outside ]{alpha}, {beta}[")]
    RangeError { r: f64, alpha: ExtReal, beta: ExtReal },
    #[error("ψ never comes within {band} of r = {r} on the grid")]
    LevelNotAttained { r: f64, band: f64 },
    #[error("u has {got} entries but there are {expected} weights")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("invalid family: {0}")]
    InvalidFamily(String),
}

/// Finitely many atoms with masses `γ_t > 0`, and the exponent `p > 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedSpace {
    pub weights: Vec<f64>,
    pub p: f64,
}

impl WeightedSpace {
    pub fn new(weights: Vec<f64>, p: f64) -> Result<Self, IntegralError> {
        let w = WeightedSpace { weights, p };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<(), IntegralError> {
        if self.weights.is_empty() {
            return Err(IntegralError::InvalidSpace("no weights".into()));
        }
        if let Some(w) = self.weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(IntegralError::InvalidSpace(format!(
                "weight {w} is not a positive real"
            )));
        }
        if !(self.p > 0.0 && self.p.is_finite()) {
            return Err(IntegralError::InvalidSpace(format!("p = {} must be positive", self.p)));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `Σγ_t`.
    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub tuple: Vec<Vec<f64>>,
    /// `Σγ_t φ(u_t)`.
    pub objective: f64,
    /// `Σγ_t ψ(u_t)`.
    pub constraint: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Hypothesis {
    /// `φ + λψ` has a unique minimum at the multiplier reaching level `r`.
    UniqueAlongPath { lambda_r: f64 },
    /// Several global minima; the identity is not guaranteed.
    NonUnique { lambda: f64, points: Vec<Vec<f64>> },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Eq82Opts {
    /// Level-set band `|ψ − r| <= band`; defaults to `1e-9·(1+|r|)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band: Option<f64>,
    /// Multiplier interval; defaults to `]0, +∞[`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<ExtReal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<ExtReal>,
    /// Rejection draws per sample before projecting; defaults to 100.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_rejections: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Eq82Report {
    pub r: f64,
    pub alpha: ExtReal,
    pub beta: ExtReal,
    pub mass: f64,
    pub band: f64,
    /// `inf φ` over `{|ψ − r| <= band}`.
    pub level_inf: f64,
    pub level_argmin: Vec<f64>,
    /// `level_inf · Σγ`.
    pub rhs: f64,
    pub tol: f64,
    pub hypothesis: Hypothesis,
    pub identity_guaranteed: bool,
    pub seed: u64,
    pub samples: usize,
    pub drawn: usize,
    pub accepted_by_rejection: usize,
    pub projected: usize,
    pub unfilled: usize,
    pub acceptance_rate: f64,
    /// The constant tuple `u ≡ argmin` attaining `rhs`.
    pub achieving: Sample,
    pub worst: Option<Sample>,
    pub violations: usize,
    pub first_violation: Option<Sample>,
    /// Lowest constant tuple `u ≡ y`, `ψ(y) <= r`, if it beats `rhs`.
    pub probe_violation: Option<Sample>,
    /// Whether coercivity of `φ + λψ` is necessary is unknown; never asserted.
    pub coercivity_necessity: &'static str,
    pub passed: bool,
}

const BLOCK: usize = 1024;

struct BlockStats {
    drawn: usize,
    rejected_ok: usize,
    projected: usize,
    unfilled: usize,
    violations: usize,
    first_violation: Option<Sample>,
    worst: Option<Sample>,
}

fn objective(w: &WeightedSpace, phi: &[f64]) -> f64 {
    w.weights.iter().zip(phi).map(|(g, v)| g * v).sum()
}

/// Checks the identity on the atoms of `w` with random feasible tuples drawn
/// from the Y-grid.
///
/// Tuples are drawn uniformly over grid points and rejected while infeasible;
/// after `max_rejections` failures the last draw is pulled toward the
/// constant tuple `u ≡ argmin` by bisection on the blend factor (needs
/// evaluators; without them the sample stays unfilled). Each block of 1024
/// samples uses its own ChaCha stream of `seed`, so results do not depend on
/// the thread count.
pub fn verify_eq82(
    phi: &ScalarField,
    psi: &ScalarField,
    w: &WeightedSpace,
    r: f64,
    samples: usize,
    seed: u64,
    opts: &Eq82Opts,
) -> Result<Eq82Report, IntegralError> {
    w.validate()?;
    if !phi.same_domain(psi) {
        return Err(FieldError::DomainMismatch.into());
    }
    let a = opts.a.unwrap_or(ExtReal::Finite(0.0));
    let b = opts.b.unwrap_or(ExtReal::PosInf);
    let problem = MultiplierProblem::new(phi.clone(), psi.clone(), a, b)?;
    let ab = alpha_beta(&problem)?;
    if !(ab.alpha < ExtReal::Finite(r) && ExtReal::Finite(r) < ab.beta) {
        return Err(IntegralError::RangeError {
            r,
            alpha: ab.alpha,
            beta: ab.beta,
        });
    }
    let hypothesis = match solve_constrained(&problem, r, &SolveOpts::default()) {
        Ok(c) => Hypothesis::UniqueAlongPath { lambda_r: c.lambda_hat },
        Err(PathError::NonUniqueMinimum { lambda, points }) => Hypothesis::NonUnique { lambda, points },
        Err(e) => return Err(e.into()),
    };

    let grid = phi.grid();
    let (pv, sv) = (phi.values(), psi.values());
    let band = opts.band.unwrap_or(1e-9 * (1.0 + r.abs()));
    let mut level: Option<usize> = None;
    for i in 0..pv.len() {
        if (sv[i] - r).abs() <= band && level.map_or(true, |k| pv[i] < pv[k]) {
            level = Some(i);
        }
    }
    let Some(k) = level else {
        return Err(IntegralError::LevelNotAttained { r, band });
    };
    let mass = w.mass();
    let rhs = pv[k] * mass;
    let tol = 1e-9 * (1.0 + rhs.abs());
    let y_hat = grid.point(k).to_vec();
    let t = w.len();
    let achieving = Sample {
        tuple: vec![y_hat.clone(); t],
        objective: objective(w, &vec![pv[k]; t]),
        constraint: objective(w, &vec![sv[k]; t]),
    };

    let cap = r * mass;
    let max_rej = opts.max_rejections.unwrap_or(100).max(1);
    let evals = phi.evaluator().zip(psi.evaluator());
    let blocks = samples.div_ceil(BLOCK);
    let stats: Vec<BlockStats> = (0..blocks)
        .into_par_iter()
        .map(|blk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(blk as u64);
            let mut s = BlockStats {
                drawn: 0,
                rejected_ok: 0,
                projected: 0,
                unfilled: 0,
                violations: 0,
                first_violation: None,
                worst: None,
            };
            let count = BLOCK.min(samples - blk * BLOCK);
            let mut idx = vec![0usize; t];
            for _ in 0..count {
                let mut found = None;
                for _ in 0..max_rej {
                    idx.iter_mut().for_each(|i| *i = rng.random_range(0..pv.len()));
                    s.drawn += 1;
                    let c = w.weights.iter().zip(&idx).map(|(g, &i)| g * sv[i]).sum::<f64>();
                    if c <= cap {
                        let o = w.weights.iter().zip(&idx).map(|(g, &i)| g * pv[i]).sum::<f64>();
                        found = Some(Sample {
                            tuple: idx.iter().map(|&i| grid.point(i).to_vec()).collect(),
                            objective: o,
                            constraint: c,
                        });
                        s.rejected_ok += 1;
                        break;
                    }
                }
                if found.is_none() {
                    if let Some((fp, fs)) = evals {
                        found = Some(project(w, &idx, grid, &y_hat, cap, &**fp, &**fs));
                        s.projected += 1;
                    } else {
                        s.unfilled += 1;
                    }
                }
                let Some(sample) = found else { continue };
                if sample.objective < rhs - tol {
                    s.violations += 1;
                    if s.first_violation.is_none() {
                        s.first_violation = Some(sample.clone());
                    }
                }
                if s.worst.as_ref().map_or(true, |x| sample.objective < x.objective) {
                    s.worst = Some(sample);
                }
            }
            s
        })
        .collect();

    let (mut drawn, mut rej, mut projected, mut unfilled, mut violations) = (0, 0, 0, 0, 0);
    let (mut first_violation, mut worst): (Option<Sample>, Option<Sample>) = (None, None);
    for s in stats {
        drawn += s.drawn;
        rej += s.rejected_ok;
        projected += s.projected;
        unfilled += s.unfilled;
        violations += s.violations;
        if first_violation.is_none() {
            first_violation = s.first_violation;
        }
        if let Some(x) = s.worst {
            if worst.as_ref().map_or(true, |y| x.objective < y.objective) {
                worst = Some(x);
            }
        }
    }

    // Structured probes: every feasible constant tuple u ≡ y.
    let probe = (0..pv.len())
        .filter(|&i| sv[i] <= r)
        .min_by(|&i, &j| pv[i].total_cmp(&pv[j]))
        .map(|i| Sample {
            tuple: vec![grid.point(i).to_vec(); t],
            objective: objective(w, &vec![pv[i]; t]),
            constraint: objective(w, &vec![sv[i]; t]),
        })
        .filter(|s| s.objective < rhs - tol);

    let identity_guaranteed = matches!(hypothesis, Hypothesis::UniqueAlongPath { .. });
    Ok(Eq82Report {
        r,
        alpha: ab.alpha,
        beta: ab.beta,
        mass,
        band,
        level_inf: pv[k],
        level_argmin: y_hat,
        rhs,
        tol,
        hypothesis,
        identity_guaranteed,
        seed,
        samples,
        drawn,
        accepted_by_rejection: rej,
        projected,
        unfilled,
        acceptance_rate: if drawn == 0 { 0.0 } else { rej as f64 / drawn as f64 },
        achieving,
        worst,
        passed: violations == 0 && probe.is_none(),
        violations,
        first_violation,
        probe_violation: probe,
        coercivity_necessity: "unknown",
    })
}

/// The largest blend `s` (by bisection) for which
/// `u(s)_t = ŷ + s(u_t − ŷ)` is feasible.
fn project(
    w: &WeightedSpace,
    idx: &[usize],
    grid: &crate::grid::Grid,
    y_hat: &[f64],
    cap: f64,
    phi: &(dyn Fn(&[f64]) -> f64 + Send + Sync),
    psi: &(dyn Fn(&[f64]) -> f64 + Send + Sync),
) -> Sample {
    let blend = |s: f64| -> Vec<Vec<f64>> {
        idx.iter()
            .map(|&i| grid.point(i).iter().zip(y_hat).map(|(u, y)| y + s * (u - y)).collect())
            .collect()
    };
    let constraint = |u: &[Vec<f64>]| w.weights.iter().zip(u).map(|(g, x)| g * psi(x)).sum::<f64>();
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if constraint(&blend(mid)) <= cap {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let tuple = blend(lo);
    Sample {
        objective: w.weights.iter().zip(&tuple).map(|(g, x)| g * phi(x)).sum(),
        constraint: constraint(&tuple),
        tuple,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JensenReport {
    pub lhs: f64,
    pub rhs: f64,
    pub tol: f64,
    pub holds: bool,
    /// Both sides agree bit for bit.
    pub equal: bool,
}

/// `(Σγ|u|^p / Σγ)`, returned as `|c|^p` exactly when `|u| ≡ c`.
fn power_mean_p(w: &WeightedSpace, u: &[f64]) -> f64 {
    let c = u[0].abs();
    if u.iter().all(|x| x.abs() == c) {
        return c.powf(w.p);
    }
    w.weights.iter().zip(u).map(|(g, x)| g * x.abs().powf(w.p)).sum::<f64>() / w.mass()
}

fn compare(
    w: &WeightedSpace,
    u: &[f64],
    f: impl Fn(f64) -> f64,
    outer: impl Fn(f64) -> f64,
) -> Result<JensenReport, IntegralError> {
    w.validate()?;
    if u.len() != w.len() {
        return Err(IntegralError::LengthMismatch {
            expected: w.len(),
            got: u.len(),
        });
    }
    let mass = w.mass();
    let lhs = if u.iter().all(|&x| x == u[0]) {
        f(u[0]) * mass
    } else {
        w.weights.iter().zip(u).map(|(g, &x)| g * f(x)).sum()
    };
    let rhs = outer(power_mean_p(w, u)) * mass;
    if !lhs.is_finite() || !rhs.is_finite() {
        return Err(IntegralError::NonFinite(format!("lhs = {lhs}, rhs = {rhs}")));
    }
    let tol = 1e-12 * (1.0 + lhs.abs() + rhs.abs());
    Ok(JensenReport {
        lhs,
        rhs,
        tol,
        holds: lhs <= rhs + tol,
        equal: lhs == rhs,
    })
}

/// `Σγ f(u) <= f((Σγ|u|^p / Σγ)^{1/p})·Σγ`.
///
/// The hypotheses on `f` (continuous, positive and differentiable on
/// `]0, ∞[`, `f <= 0` on `]−∞, 0]`, `f′(y)/y^{p−1}` injective) are the
/// caller's responsibility.
pub fn jensen_check(f: impl Fn(f64) -> f64, w: &WeightedSpace, u: &[f64]) -> Result<JensenReport, IntegralError> {
    let p = w.p;
    let all_same = u.first().is_some_and(|&c| u.iter().all(|x| x.abs() == c.abs()));
    let root = |m: f64| if all_same { u[0].abs() } else { m.powf(1.0 / p) };
    compare(w, u, &f, |m| f(root(m)))
}

/// `Σγ log(1+|u|^p) <= log(1 + Σγ|u|^p / Σγ)·Σγ`.
pub fn log_inequality_check(w: &WeightedSpace, u: &[f64]) -> Result<JensenReport, IntegralError> {
    let p = w.p;
    compare(w, u, |x| x.abs().powf(p).ln_1p(), f64::ln_1p)
}

/// `f(y) = a₀ log(1+(y⁺)^p) + Σ aᵢ (y⁺)^{qᵢ}` with `aᵢ >= 0`, `Σaᵢ > 0`,
/// `0 < qᵢ < p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogPowerFamily {
    pub p: f64,
    pub a0: f64,
    /// `(aᵢ, qᵢ)` pairs.
    pub terms: Vec<(f64, f64)>,
}

impl LogPowerFamily {
    pub fn validate(&self) -> Result<(), IntegralError> {
        let bad = |m: String| Err(IntegralError::InvalidFamily(m));
        if !(self.p > 0.0 && self.p.is_finite()) {
            return bad(format!("p = {} must be positive", self.p));
        }
        if !(self.a0 >= 0.0) || self.terms.iter().any(|&(a, _)| !(a >= 0.0 && a.is_finite())) {
            return bad("coefficients must be non-negative".into());
        }
        if self.a0 + self.terms.iter().map(|t| t.0).sum::<f64>() <= 0.0 {
            return bad("coefficients must not all vanish".into());
        }
        if let Some(&(_, q)) = self.terms.iter().find(|&&(_, q)| !(q > 0.0 && q < self.p)) {
            return bad(format!("exponent {q} must lie in ]0, p["));
        }
        Ok(())
    }

    pub fn eval(&self, y: f64) -> f64 {
        let yp = y.max(0.0);
        self.a0 * yp.powf(self.p).ln_1p() + self.terms.iter().map(|&(a, q)| a * yp.powf(q)).sum::<f64>()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub draws: usize,
    pub seed: u64,
    pub violations: usize,
    /// Smallest `rhs − lhs` over the random draws.
    pub worst_margin: f64,
    pub worst_draw: Option<usize>,
    pub constant_checks: usize,
    pub constant_exact: usize,
    pub passed: bool,
}

struct Draw {
    w: WeightedSpace,
    u: Vec<f64>,
    c: f64,
    family: Option<LogPowerFamily>,
}

fn random_draw(rng: &mut ChaCha8Rng, with_family: bool) -> Draw {
    let t = rng.random_range(1..=8);
    let weights = (0..t).map(|_| rng.random_range(0.01..5.0)).collect();
    // p ∈ ]0, 4].
    let p = 4.0 * (1.0 - rng.random::<f64>());
    let u = (0..t).map(|_| rng.random_range(-5.0..5.0)).collect();
    let c = rng.random_range(0.0..5.0);
    let family = with_family.then(|| {
        let k = rng.random_range(0..=3);
        LogPowerFamily {
            p,
            a0: 0.05 + rng.random_range(0.0..2.0),
            terms: (0..k)
                .map(|_| (rng.random_range(0.0..2.0), p * rng.random_range(0.01..0.99)))
                .collect(),
        }
    });
    Draw {
        w: WeightedSpace { weights, p },
        u,
        c,
        family,
    }
}

fn run_suite(
    draws: usize,
    seed: u64,
    with_family: bool,
    check: impl Fn(&Draw, &[f64]) -> Result<JensenReport, IntegralError> + Sync,
) -> Result<SuiteReport, IntegralError> {
    let results: Vec<(f64, bool, bool)> = (0..draws)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let d = random_draw(&mut rng, with_family);
            let r = check(&d, &d.u)?;
            let constant = check(&d, &vec![d.c; d.u.len()])?;
            Ok((r.rhs - r.lhs, r.holds, constant.equal))
        })
        .collect::<Result<_, IntegralError>>()?;
    let violations = results.iter().filter(|r| !r.1).count();
    let mut worst: Option<(usize, f64)> = None;
    for (i, &(m, _, _)) in results.iter().enumerate() {
        if worst.map_or(true, |w| m < w.1) {
            worst = Some((i, m));
        }
    }
    let constant_exact = results.iter().filter(|r| r.2).count();
    Ok(SuiteReport {
        draws,
        seed,
        violations,
        worst_margin: worst.map_or(f64::INFINITY, |w| w.1),
        worst_draw: worst.map(|w| w.0),
        constant_checks: draws,
        constant_exact,
        passed: violations == 0 && constant_exact == draws,
    })
}

/// Random `(weights, u, p)` draws against the logarithmic inequality.
pub fn log_inequality_suite(draws: usize, seed: u64) -> Result<SuiteReport, IntegralError> {
    run_suite(draws, seed, false, |d, u| log_inequality_check(&d.w, u))
}

/// Random members of the log-power family against [`jensen_check`].
pub fn log_power_suite(draws: usize, seed: u64) -> Result<SuiteReport, IntegralError> {
    run_suite(draws, seed, true, |d, u| {
        let f = d.family.as_ref().expect("family drawn");
        f.validate()?;
        jensen_check(|y| f.eval(y), &d.w, u)
    })
}
