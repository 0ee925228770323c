//! Sup-inf / inf-sup on product grids, the two-minima alternative, the
//! ψ-recursion over simplices and filtering-cover reductions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::FieldError;
use crate::field::BivariateField;
use crate::grid::{lex_cmp, Grid, GridSpec};
use crate::minima::{minima_of_values, ClusterTol, MinimaCluster};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MinimaxError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("simplex dimension must be at least 1")]
    ZeroSimplexDim,
    #[error("the μ-grid needs at least 2 samples, got {0}")]
    CoarseMuGrid(usize),
    #[error("cover does not contain y-indices {missing:?}")]
    NotCovering { missing: Vec<usize> },
    #[error("cover is not filtering: no member contains the union of members {first} and {second}")]
    NotFiltering { first: usize, second: usize },
    #[error("cover member {member} references y-index {index} outside the grid")]
    IndexOutOfRange { member: usize, index: usize },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinimaxTol {
    /// Defaults to `1e-7·(1+|inf_sup|)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_val: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_sep: Option<f64>,
}

impl MinimaxTol {
    fn cluster(&self) -> ClusterTol {
        ClusterTol {
            tol_val: self.tol_val,
            tol_sep: self.tol_sep,
        }
    }

    pub fn validate(&self) -> Result<(), FieldError> {
        if let Some(g) = self.gap_tol {
            if !(g > 0.0 && g.is_finite()) {
                return Err(FieldError::InvalidTolerance(format!(
                    "gap_tol must be positive, got {g}"
                )));
            }
        }
        self.cluster().validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwoMinima {
    pub y_hat: Vec<f64>,
    pub minima: MinimaCluster,
    /// `true` when `y_hat` lies strictly between two y-samples and the slice
    /// was linearly interpolated there.
    pub interpolated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diagnostic {
    /// `f(x, y2) < min(f(x, y1), f(x, y3)) - tol_val` with `y1 < y2 < y3`.
    QuasiConcavityViolation {
        x: Vec<f64>,
        y1: Vec<f64>,
        y2: Vec<f64>,
        y3: Vec<f64>,
        values: [f64; 3],
    },
    /// A step along a y-line far larger than its neighbouring steps.
    Discontinuity {
        x: Vec<f64>,
        y_left: Vec<f64>,
        y_right: Vec<f64>,
        value_left: f64,
        value_right: f64,
        jump: f64,
    },
    /// Neither defect was found on the sampled lines.
    Unexplained,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Alternative {
    GapClosed,
    TwoMinima(TwoMinima),
    Inconclusive { diagnostic: Diagnostic },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinimaxReport {
    pub sup_inf: f64,
    pub inf_sup: f64,
    pub gap: f64,
    pub gap_tol: f64,
    pub gap_closed: bool,
    /// A y maximizing `inf_x f(x, y)`.
    pub y_star: Vec<f64>,
    /// An x minimizing `sup_y f(x, y)`.
    pub x_star: Vec<f64>,
    pub alternative: Alternative,
    /// First sampled slice with two or more separated minima, reported even
    /// when the gap is closed.
    pub two_minima: Option<TwoMinima>,
}

/// Per-y minimum over x.
pub fn inner_inf(f: &BivariateField) -> Vec<f64> {
    let (nx, ny) = (f.nx(), f.ny());
    let v = f.values();
    (0..ny)
        .into_par_iter()
        .map(|j| (0..nx).map(|i| v[i * ny + j]).fold(f64::INFINITY, f64::min))
        .collect()
}

/// Per-x maximum over y.
pub fn inner_sup(f: &BivariateField) -> Vec<f64> {
    (0..f.nx())
        .into_par_iter()
        .map(|i| f.row(i).iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .collect()
}

fn arg_best(v: &[f64], better: impl Fn(f64, f64) -> bool) -> usize {
    let mut best = 0;
    for (k, &x) in v.iter().enumerate().skip(1) {
        if better(x, v[best]) {
            best = k;
        }
    }
    best
}

pub fn sup_inf(f: &BivariateField) -> f64 {
    inner_inf(f).into_iter().fold(f64::NEG_INFINITY, f64::max)
}

pub fn inf_sup(f: &BivariateField) -> f64 {
    inner_sup(f).into_iter().fold(f64::INFINITY, f64::min)
}

pub fn classify_alternative(f: &BivariateField, tol: &MinimaxTol) -> Result<MinimaxReport, MinimaxError> {
    tol.validate()?;
    if f.nx() == 0 || f.ny() == 0 {
        return Err(FieldError::EmptyGrid.into());
    }
    let infs = inner_inf(f);
    let sups = inner_sup(f);
    let j_star = arg_best(&infs, |a, b| a > b);
    let i_star = arg_best(&sups, |a, b| a < b);
    let (si, is) = (infs[j_star], sups[i_star]);
    let gap = is - si;
    let gap_tol = tol.gap_tol.unwrap_or(1e-7 * (1.0 + is.abs()));
    let gap_closed = gap.abs() <= gap_tol;

    let two_minima = scan_slices(f, tol.cluster())?;
    let alternative = if gap_closed {
        Alternative::GapClosed
    } else if let Some(t) = &two_minima {
        Alternative::TwoMinima(t.clone())
    } else if let Some(t) = scan_interpolated(f, tol.cluster())? {
        Alternative::TwoMinima(t)
    } else {
        Alternative::Inconclusive {
            diagnostic: diagnose(f, tol.cluster()),
        }
    };
    Ok(MinimaxReport {
        sup_inf: si,
        inf_sup: is,
        gap,
        gap_tol,
        gap_closed,
        y_star: f.y_grid().point(j_star).to_vec(),
        x_star: f.x_grid().point(i_star).to_vec(),
        alternative,
        two_minima,
    })
}

/// Index order of the y-grid sorted lexicographically.
fn y_order(y: &Grid) -> Vec<usize> {
    let mut order: Vec<usize> = (0..y.len()).collect();
    if !matches!(y.spec(), GridSpec::Uniform { .. }) {
        order.sort_by(|&a, &b| lex_cmp(y.point(a), y.point(b)));
    }
    order
}

fn scan_slices(f: &BivariateField, tol: ClusterTol) -> Result<Option<TwoMinima>, MinimaxError> {
    let x = f.x_grid();
    let order = y_order(f.y_grid());
    let found: Vec<Option<MinimaCluster>> = order
        .par_iter()
        .map(|&j| {
            let slice = f.slice_at_y(j);
            minima_of_values(x, &slice, tol, |_| true).map(|m| (m.len() >= 2).then_some(m))
        })
        .collect::<Result<_, _>>()?;
    Ok(order.iter().zip(found).find_map(|(&j, m)| {
        m.map(|minima| TwoMinima {
            y_hat: f.y_grid().point(j).to_vec(),
            minima,
            interpolated: false,
        })
    }))
}

/// Lines of y-indices, each in increasing coordinate order: the sorted grid
/// for one-dimensional Y, the axis lines of a uniform product grid otherwise.
fn y_lines(y: &Grid) -> Vec<Vec<usize>> {
    if y.dim() == 1 {
        return vec![y_order(y)];
    }
    let Some(shape) = y.shape() else {
        return Vec::new();
    };
    let mut lines = Vec::new();
    for (axis, &len) in shape.iter().enumerate() {
        for start in 0..y.len() {
            if y.axis_neighbor(start, axis, -1).is_some() {
                continue;
            }
            let mut line = Vec::with_capacity(len);
            let mut cur = Some(start);
            while let Some(c) = cur {
                line.push(c);
                cur = y.axis_neighbor(c, axis, 1);
            }
            lines.push(line);
        }
    }
    lines
}

fn is_jump(steps: &[f64], k: usize, tol_val: f64) -> bool {
    let left = if k > 0 { steps[k - 1] } else { 0.0 };
    let right = steps.get(k + 1).copied().unwrap_or(0.0);
    if k == 0 && steps.len() == 1 {
        return false;
    }
    steps[k] > (10.0 * left.max(right)).max(tol_val)
}

/// Walks each y-segment of a one-dimensional Y with the slice linearly
/// interpolated, looking for the first parameter where two separated
/// x-points share the lower envelope. Segments with a jump are skipped.
fn scan_interpolated(f: &BivariateField, tol: ClusterTol) -> Result<Option<TwoMinima>, MinimaxError> {
    let y = f.y_grid();
    if y.dim() != 1 || f.nx() < 2 {
        return Ok(None);
    }
    let x = f.x_grid();
    let order = y_order(y);
    let nx = f.nx();
    let tol_val_floor = tol.resolve(0.0, x.spacing()).0;
    let rows_steps: Vec<Vec<f64>> = (0..nx)
        .map(|i| {
            order
                .windows(2)
                .map(|w| (f.value(i, w[1]) - f.value(i, w[0])).abs())
                .collect()
        })
        .collect();

    for (k, w) in order.windows(2).enumerate() {
        let (j0, j1) = (w[0], w[1]);
        if (0..nx).any(|i| is_jump(&rows_steps[i], k, tol_val_floor)) {
            continue;
        }
        let a: Vec<f64> = (0..nx).map(|i| f.value(i, j0)).collect();
        let b: Vec<f64> = (0..nx).map(|i| f.value(i, j1)).collect();
        let interp = |t: f64| -> Vec<f64> { a.iter().zip(&b).map(|(p, q)| p + t * (q - p)).collect() };

        let mut leader = arg_best(&a, |p, q| p < q);
        let mut t_cur = 0.0;
        let mut guard = 0;
        while guard < 4 * nx {
            guard += 1;
            let mut next: Option<(f64, usize)> = None;
            for i in 0..nx {
                if i == leader {
                    continue;
                }
                let d0 = a[i] - a[leader];
                let d1 = b[i] - b[leader];
                if d1 >= d0 {
                    continue;
                }
                let t = d0 / (d0 - d1);
                if t <= t_cur || t >= 1.0 {
                    continue;
                }
                if next.map_or(true, |(tb, _)| t < tb) {
                    next = Some((t, i));
                }
            }
            let Some((t, i)) = next else { break };
            let slice = interp(t);
            let m = minima_of_values(x, &slice, tol, |_| true)?;
            if m.len() >= 2 {
                let y_hat = vec![y.point(j0)[0] + t * (y.point(j1)[0] - y.point(j0)[0])];
                return Ok(Some(TwoMinima {
                    y_hat,
                    minima: m,
                    interpolated: true,
                }));
            }
            leader = i;
            t_cur = t;
        }
    }
    Ok(None)
}

fn diagnose(f: &BivariateField, tol: ClusterTol) -> Diagnostic {
    let x = f.x_grid();
    let y = f.y_grid();
    let lines = y_lines(y);
    for i in 0..f.nx() {
        let row = f.row(i);
        let tol_val = tol
            .resolve(row.iter().copied().fold(0.0, |m, v| m.max(v.abs())), x.spacing())
            .0;
        for line in &lines {
            if let Some((p, q, r)) = quasi_concavity_violation(line, row, tol_val) {
                return Diagnostic::QuasiConcavityViolation {
                    x: x.point(i).to_vec(),
                    y1: y.point(p).to_vec(),
                    y2: y.point(q).to_vec(),
                    y3: y.point(r).to_vec(),
                    values: [row[p], row[q], row[r]],
                };
            }
        }
    }
    for i in 0..f.nx() {
        let row = f.row(i);
        let tol_val = tol.resolve(0.0, x.spacing()).0;
        for line in &lines {
            let steps: Vec<f64> = line.windows(2).map(|w| (row[w[1]] - row[w[0]]).abs()).collect();
            if let Some(k) = (0..steps.len()).find(|&k| is_jump(&steps, k, tol_val)) {
                let (l, r) = (line[k], line[k + 1]);
                return Diagnostic::Discontinuity {
                    x: x.point(i).to_vec(),
                    y_left: y.point(l).to_vec(),
                    y_right: y.point(r).to_vec(),
                    value_left: row[l],
                    value_right: row[r],
                    jump: steps[k],
                };
            }
        }
    }
    Diagnostic::Unexplained
}

/// First `(y1, y2, y3)` on the line with the middle value below both
/// outer ones by more than `tol_val`.
fn quasi_concavity_violation(line: &[usize], row: &[f64], tol_val: f64) -> Option<(usize, usize, usize)> {
    let n = line.len();
    if n < 3 {
        return None;
    }
    let mut suffix = vec![0usize; n];
    suffix[n - 1] = n - 1;
    for k in (0..n - 1).rev() {
        suffix[k] = if row[line[k]] > row[line[suffix[k + 1]]] {
            k
        } else {
            suffix[k + 1]
        };
    }
    let mut prefix = 0usize;
    for k in 1..n - 1 {
        if row[line[k - 1]] > row[line[prefix]] {
            prefix = k - 1;
        }
        let s = suffix[k + 1];
        let lo = row[line[prefix]].min(row[line[s]]);
        if row[line[k]] < lo - tol_val {
            return Some((line[prefix], line[k], line[s]));
        }
    }
    None
}

/// Result of [`simplex_sup_inf`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimplexSupInf {
    pub value: f64,
    pub argmax: Vec<f64>,
}

/// `sup_{λ ∈ S_n} inf_{x ∈ X} f(x, λ)` sampled through the reparametrization
/// `λ = (μ·s, 1 − μ)`, `s ∈ S_{n−1}`, with an `m`-point μ-grid per level.
pub fn simplex_sup_inf<F>(f: F, x: &GridSpec, n: usize, m: usize) -> Result<SimplexSupInf, MinimaxError>
where
    F: Fn(&[f64], &[f64]) -> f64 + Sync,
{
    if n == 0 {
        return Err(MinimaxError::ZeroSimplexDim);
    }
    let grid = Grid::new(x.clone())?;
    if n > 1 && m < 2 {
        return Err(MinimaxError::CoarseMuGrid(m));
    }
    let inf_x = |lambda: &[f64]| -> f64 { grid.points().map(|p| f(p, lambda)).fold(f64::INFINITY, f64::min) };
    if n == 1 {
        return Ok(SimplexSupInf {
            value: inf_x(&[1.0]),
            argmax: vec![1.0],
        });
    }
    let mu = |k: usize| k as f64 / (m - 1) as f64;

    fn level<G: Fn(&[f64]) -> f64>(
        k: usize,
        scale: f64,
        buf: &mut [f64],
        m: usize,
        eval: &G,
        best: &mut (f64, Vec<f64>),
    ) {
        if k == 1 {
            buf[0] = scale;
            let v = eval(buf);
            if v > best.0 {
                best.0 = v;
                best.1.copy_from_slice(buf);
            }
            return;
        }
        for j in 0..m {
            let mu = j as f64 / (m - 1) as f64;
            buf[k - 1] = scale * (1.0 - mu);
            level(k - 1, scale * mu, buf, m, eval, best);
        }
    }

    let partial: Vec<(f64, Vec<f64>)> = (0..m)
        .into_par_iter()
        .map(|j| {
            let mut buf = vec![0.0; n];
            buf[n - 1] = 1.0 - mu(j);
            let mut best = (f64::NEG_INFINITY, vec![0.0; n]);
            level(n - 1, mu(j), &mut buf, m, &inf_x, &mut best);
            best
        })
        .collect();
    let (value, argmax) =
        partial.into_iter().fold(
            (f64::NEG_INFINITY, vec![0.0; n]),
            |acc, p| if p.0 > acc.0 { p } else { acc },
        );
    Ok(SimplexSupInf { value, argmax })
}

/// Checks that `cover` covers the y-grid and is filtering.
pub fn validate_filtering_cover(ny: usize, cover: &[Vec<usize>]) -> Result<(), MinimaxError> {
    let sets = bitsets(ny, cover)?;
    let mut seen = vec![false; ny];
    for member in cover {
        for &j in member {
            seen[j] = true;
        }
    }
    let missing: Vec<usize> = (0..ny).filter(|&j| !seen[j]).collect();
    if !missing.is_empty() {
        return Err(MinimaxError::NotCovering { missing });
    }
    for a in 0..sets.len() {
        for b in a + 1..sets.len() {
            let union: Vec<u64> = sets[a].iter().zip(&sets[b]).map(|(p, q)| p | q).collect();
            if !sets.iter().any(|c| contains(c, &union)) {
                return Err(MinimaxError::NotFiltering { first: a, second: b });
            }
        }
    }
    Ok(())
}

pub(crate) fn bitsets(n: usize, family: &[Vec<usize>]) -> Result<Vec<Vec<u64>>, MinimaxError> {
    let words = n.div_ceil(64);
    family
        .iter()
        .enumerate()
        .map(|(k, member)| {
            let mut bits = vec![0u64; words];
            for &j in member {
                if j >= n {
                    return Err(MinimaxError::IndexOutOfRange { member: k, index: j });
                }
                bits[j / 64] |= 1 << (j % 64);
            }
            Ok(bits)
        })
        .collect()
}

pub(crate) fn contains(sup: &[u64], sub: &[u64]) -> bool {
    sup.iter().zip(sub).all(|(p, q)| q & !p == 0)
}

/// `max_C sup_{y ∈ C} inf_x f(x, y)` over a filtering cover of the y-grid.
pub fn cover_sup_inf(f: &BivariateField, cover: &[Vec<usize>]) -> Result<f64, MinimaxError> {
    validate_filtering_cover(f.ny(), cover)?;
    let infs = inner_inf(f);
    Ok(cover
        .iter()
        .map(|c| c.iter().map(|&j| infs[j]).fold(f64::NEG_INFINITY, f64::max))
        .fold(f64::NEG_INFINITY, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn square(n: usize, text: &str) -> BivariateField {
        let g = Arc::new(Grid::uniform_1d(0.0, 1.0, n).unwrap());
        BivariateField::from_expr(g.clone(), g, text).unwrap()
    }

    #[test]
    fn negative_squared_distance_has_two_minima_at_half() {
        let f = square(101, "-(x1 - x2)^2");
        let r = classify_alternative(&f, &MinimaxTol::default()).unwrap();
        assert_eq!(r.sup_inf, -0.25);
        assert_eq!(r.inf_sup, 0.0);
        let Alternative::TwoMinima(t) = r.alternative else {
            panic!("expected two minima, got {:?}", r.alternative)
        };
        assert_eq!(t.y_hat, vec![0.5]);
        assert_eq!(t.minima.points, vec![vec![0.0], vec![1.0]]);
        assert!(!t.interpolated);
    }

    #[test]
    fn constant_field_closes_the_gap() {
        let f = square(11, "3");
        assert_eq!(sup_inf(&f), 3.0);
        assert_eq!(inf_sup(&f), 3.0);
        let r = classify_alternative(&f, &MinimaxTol::default()).unwrap();
        assert_eq!(r.alternative, Alternative::GapClosed);
    }

    #[test]
    fn interpolated_crossing_between_samples() {
        // Two lines crossing at y = 1/3, which is not a y-sample.
        let x = Arc::new(Grid::explicit_1d(&[0.0, 1.0]).unwrap());
        let y = Arc::new(Grid::uniform_1d(0.0, 1.0, 3).unwrap());
        let f = BivariateField::tabulate(x, y, |x, y| if x[0] == 0.0 { y[0] } else { 0.5 - 0.5 * y[0] }).unwrap();
        let r = classify_alternative(&f, &MinimaxTol::default()).unwrap();
        let Alternative::TwoMinima(t) = r.alternative else {
            panic!("expected two minima")
        };
        assert!(t.interpolated);
        assert!((t.y_hat[0] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn quasi_concavity_witness() {
        let line = [0, 1, 2, 3];
        let row = [1.0, 0.0, 2.0, 1.0];
        assert_eq!(quasi_concavity_violation(&line, &row, 1e-9), Some((0, 1, 2)));
        assert_eq!(quasi_concavity_violation(&line, &[0.0, 1.0, 2.0, 1.0], 1e-9), None);
    }

    #[test]
    fn simplex_base_case_is_the_vertex() {
        let x = GridSpec::uniform_1d(-1.0, 1.0, 5);
        let r = simplex_sup_inf(|x, l| x[0] * l[0], &x, 1, 10).unwrap();
        assert_eq!(r.value, -1.0);
        assert!(matches!(
            simplex_sup_inf(|_, _| 0.0, &x, 0, 10),
            Err(MinimaxError::ZeroSimplexDim)
        ));
    }

    #[test]
    fn covers() {
        let f = square(5, "x1*x2 - x2^2");
        let whole = vec![(0..5).collect::<Vec<_>>()];
        assert_eq!(cover_sup_inf(&f, &whole).unwrap(), sup_inf(&f));
        let halves = vec![vec![0, 1, 2], vec![3, 4]];
        assert_eq!(
            cover_sup_inf(&f, &halves),
            Err(MinimaxError::NotFiltering { first: 0, second: 1 })
        );
        assert_eq!(
            cover_sup_inf(&f, &[vec![0, 1]]),
            Err(MinimaxError::NotCovering { missing: vec![2, 3, 4] })
        );
    }
}
