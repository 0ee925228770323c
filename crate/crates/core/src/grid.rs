//! Finite sampled domains.

use serde::{Deserialize, Serialize};

use crate::error::FieldError;

/// Description of a sampled domain, either a uniform product grid or an
/// explicit list of points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, try_from = "RawGridSpec")]
pub enum GridSpec {
    Uniform { lo: Vec<f64>, hi: Vec<f64>, n: Vec<usize> },
    Explicit { points: Vec<Vec<f64>> },
}

// Untagged enums cannot reject unknown keys, so deserialization goes
// through a flat struct that can.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGridSpec {
    lo: Option<Vec<f64>>,
    hi: Option<Vec<f64>>,
    n: Option<Vec<usize>>,
    points: Option<Vec<Vec<f64>>>,
}

impl TryFrom<RawGridSpec> for GridSpec {
    type Error = String;

    fn try_from(r: RawGridSpec) -> Result<Self, String> {
        match r {
            RawGridSpec {
                lo: Some(lo),
                hi: Some(hi),
                n: Some(n),
                points: None,
            } => Ok(GridSpec::Uniform { lo, hi, n }),
            RawGridSpec {
                lo: None,
                hi: None,
                n: None,
                points: Some(points),
            } => Ok(GridSpec::Explicit { points }),
            _ => Err("a domain is either {lo, hi, n} or {points}".into()),
        }
    }
}

impl GridSpec {
    pub fn uniform_1d(lo: f64, hi: f64, n: usize) -> Self {
        GridSpec::Uniform {
            lo: vec![lo],
            hi: vec![hi],
            n: vec![n],
        }
    }

    pub fn explicit_1d(points: &[f64]) -> Self {
        GridSpec::Explicit {
            points: points.iter().map(|&p| vec![p]).collect(),
        }
    }

    pub fn validate(&self) -> Result<(), FieldError> {
        match self {
            GridSpec::Uniform { lo, hi, n } => {
                if lo.is_empty() || lo.len() != hi.len() || lo.len() != n.len() {
                    return Err(FieldError::InvalidGrid(format!(
                        "lo/hi/n must have the same non-zero length (got {}, {}, {})",
                        lo.len(),
                        hi.len(),
                        n.len()
                    )));
                }
                for k in 0..lo.len() {
                    if !lo[k].is_finite() || !hi[k].is_finite() {
                        return Err(FieldError::InvalidGrid(format!(
                            "dimension {k}: uniform bounds must be finite"
                        )));
                    }
                    if lo[k] >= hi[k] {
                        return Err(FieldError::InvalidGrid(format!(
                            "dimension {k}: lo ({}) must be < hi ({})",
                            lo[k], hi[k]
                        )));
                    }
                    if n[k] < 2 {
                        return Err(FieldError::InvalidGrid(format!(
                            "dimension {k}: need at least 2 samples, got {}",
                            n[k]
                        )));
                    }
                }
                Ok(())
            }
            GridSpec::Explicit { points } => {
                let Some(first) = points.first() else {
                    return Err(FieldError::EmptyGrid);
                };
                let dim = first.len();
                if dim == 0 {
                    return Err(FieldError::InvalidGrid("points must have dimension ≥ 1".into()));
                }
                for (i, p) in points.iter().enumerate() {
                    if p.len() != dim {
                        return Err(FieldError::InvalidGrid(format!(
                            "point {i} has dimension {} (expected {dim})",
                            p.len()
                        )));
                    }
                    if p.iter().any(|c| !c.is_finite()) {
                        return Err(FieldError::InvalidGrid(format!("point {i} is not finite")));
                    }
                }
                Ok(())
            }
        }
    }
}

/// A materialized grid: coordinates of every sample, in index order.
///
/// Uniform grids are enumerated row-major with the first coordinate varying
/// slowest, so index order coincides with lexicographic coordinate order.
#[derive(Clone, Debug)]
pub struct Grid {
    spec: GridSpec,
    dim: usize,
    len: usize,
    coords: Vec<f64>,
    spacing: f64,
    shape: Option<Vec<usize>>,
}

impl Grid {
    pub fn new(spec: GridSpec) -> Result<Self, FieldError> {
        spec.validate()?;
        match &spec {
            GridSpec::Uniform { lo, hi, n } => {
                let dim = lo.len();
                let len = n
                    .iter()
                    .try_fold(1usize, |acc, &k| acc.checked_mul(k))
                    .ok_or_else(|| FieldError::InvalidGrid("grid size overflows usize".into()))?;
                let axes: Vec<Vec<f64>> = (0..dim).map(|k| axis(lo[k], hi[k], n[k])).collect();
                let mut coords = Vec::with_capacity(len * dim);
                let mut idx = vec![0usize; dim];
                for _ in 0..len {
                    for k in 0..dim {
                        coords.push(axes[k][idx[k]]);
                    }
                    for k in (0..dim).rev() {
                        idx[k] += 1;
                        if idx[k] < n[k] {
                            break;
                        }
                        idx[k] = 0;
                    }
                }
                let spacing = (0..dim)
                    .map(|k| (hi[k] - lo[k]) / (n[k] - 1) as f64)
                    .fold(0.0, f64::max);
                Ok(Grid {
                    dim,
                    len,
                    coords,
                    spacing,
                    shape: Some(n.clone()),
                    spec,
                })
            }
            GridSpec::Explicit { points } => {
                let dim = points[0].len();
                let coords: Vec<f64> = points.iter().flatten().copied().collect();
                let mut min_dist = f64::INFINITY;
                for i in 0..points.len() {
                    for j in (i + 1)..points.len() {
                        let d = distance(&points[i], &points[j]);
                        if d == 0.0 {
                            return Err(FieldError::InvalidGrid(format!("explicit points {i} and {j} coincide")));
                        }
                        min_dist = min_dist.min(d);
                    }
                }
                // Half the closest-pair distance: the default separation of
                // twice the spacing then keeps every listed point distinct.
                let spacing = if min_dist.is_finite() { min_dist / 2.0 } else { 1.0 };
                Ok(Grid {
                    dim,
                    len: points.len(),
                    coords,
                    spacing,
                    shape: None,
                    spec,
                })
            }
        }
    }

    pub fn uniform_1d(lo: f64, hi: f64, n: usize) -> Result<Self, FieldError> {
        Grid::new(GridSpec::uniform_1d(lo, hi, n))
    }

    pub fn explicit_1d(points: &[f64]) -> Result<Self, FieldError> {
        Grid::new(GridSpec::explicit_1d(points))
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Largest per-axis step for uniform grids; half the closest-pair
    /// distance for explicit point lists.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Per-axis sample counts for uniform grids.
    pub fn shape(&self) -> Option<&[usize]> {
        self.shape.as_deref()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    /// Coordinates of a one-dimensional grid.
    pub fn coords_1d(&self) -> Option<&[f64]> {
        (self.dim == 1).then_some(self.coords.as_slice())
    }

    /// Index of the grid point within `tol` (Euclidean) of `p`, if any.
    pub fn locate(&self, p: &[f64], tol: f64) -> Option<usize> {
        if p.len() != self.dim {
            return None;
        }
        if let GridSpec::Uniform { lo, hi, n } = &self.spec {
            let mut index = 0usize;
            for k in 0..self.dim {
                let step = (hi[k] - lo[k]) / (n[k] - 1) as f64;
                let j = ((p[k] - lo[k]) / step).round();
                if j < 0.0 || j > (n[k] - 1) as f64 {
                    return None;
                }
                index = index * n[k] + j as usize;
            }
            return (distance(self.point(index), p) <= tol).then_some(index);
        }
        self.points()
            .enumerate()
            .map(|(i, q)| (i, distance(p, q)))
            .filter(|&(_, d)| d <= tol)
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i)
    }

    /// Index of the neighbor along `axis` at offset `step` (±1) on a uniform
    /// grid, or `None` at the boundary.
    pub fn axis_neighbor(&self, i: usize, axis: usize, step: isize) -> Option<usize> {
        let shape = self.shape.as_ref()?;
        let stride: usize = shape[axis + 1..].iter().product();
        let pos = (i / stride) % shape[axis];
        let next = pos as isize + step;
        if next < 0 || next >= shape[axis] as isize {
            return None;
        }
        Some((i as isize + step * stride as isize) as usize)
    }
}

fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let last = (n - 1) as f64;
    (0..n)
        .map(|k| {
            if k == n - 1 {
                hi
            } else {
                lo + (hi - lo) * k as f64 / last
            }
        })
        .collect()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum()
}

/// Lexicographic comparison of coordinate vectors.
pub fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}
