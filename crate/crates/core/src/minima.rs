//! Tolerance-aware extraction of all global minima on a grid.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::FieldError;
use crate::field::ScalarField;
use crate::grid::{distance, lex_cmp, Grid};

/// The global minima of a sampled function, merged into representatives.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinimaCluster {
    /// Representative points, sorted lexicographically.
    pub points: Vec<Vec<f64>>,
    /// Grid indices of the representatives, in the same order.
    pub indices: Vec<usize>,
    /// Field values at the representatives.
    pub values: Vec<f64>,
    /// Exact grid minimum.
    pub value: f64,
    pub tol_val: f64,
    pub tol_sep: f64,
}

impl MinimaCluster {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_unique(&self) -> bool {
        self.points.len() == 1
    }
}

/// Clustering tolerances; `None` selects the defaults
/// `tol_val = 1e-9·(1+|min|)` and `tol_sep = 2·spacing`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterTol {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_val: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_sep: Option<f64>,
}

impl ClusterTol {
    pub fn new(tol_val: f64, tol_sep: f64) -> Self {
        ClusterTol {
            tol_val: Some(tol_val),
            tol_sep: Some(tol_sep),
        }
    }

    pub fn resolve(&self, min: f64, spacing: f64) -> (f64, f64) {
        (
            self.tol_val.unwrap_or(1e-9 * (1.0 + min.abs())),
            self.tol_sep.unwrap_or(2.0 * spacing),
        )
    }

    pub fn validate(&self) -> Result<(), FieldError> {
        for (name, v) in [("tol_val", self.tol_val), ("tol_sep", self.tol_sep)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(FieldError::InvalidTolerance(format!(
                        "{name} must be positive, got {v}"
                    )));
                }
            }
        }
        Ok(())
    }
}

pub fn global_minima(field: &ScalarField, tol_val: f64, tol_sep: f64) -> Result<MinimaCluster, FieldError> {
    ClusterTol::new(tol_val, tol_sep).validate()?;
    minima_of_values(field.grid(), field.values(), ClusterTol::new(tol_val, tol_sep), |_| {
        true
    })
}

pub fn global_minima_with(field: &ScalarField, tol: ClusterTol) -> Result<MinimaCluster, FieldError> {
    minima_of_values(field.grid(), field.values(), tol, |_| true)
}

/// Global minima of `values` over the grid points accepted by `keep`.
///
/// Candidates within `tol_val` of the minimum are grouped by single
/// linkage at distance `< tol_sep`, so a flat valley stays one cluster. Each
/// group is represented by its least-valued point (ties: lexicographically
/// smallest).
pub fn minima_of_values<K>(grid: &Grid, values: &[f64], tol: ClusterTol, keep: K) -> Result<MinimaCluster, FieldError>
where
    K: Fn(usize) -> bool,
{
    tol.validate()?;
    if values.len() != grid.len() {
        return Err(FieldError::LengthMismatch {
            expected: grid.len(),
            got: values.len(),
        });
    }
    let mut min = f64::INFINITY;
    for (i, &v) in values.iter().enumerate() {
        if keep(i) && v < min {
            min = v;
        }
    }
    if !min.is_finite() {
        return Err(FieldError::EmptyGrid);
    }
    let (tol_val, tol_sep) = tol.resolve(min, grid.spacing());
    let candidates: Vec<usize> = (0..values.len())
        .filter(|&i| keep(i) && values[i] <= min + tol_val)
        .collect();
    let groups = single_linkage(grid, &candidates, tol_sep);

    let mut reps: Vec<usize> = groups
        .iter()
        .map(|g| {
            *g.iter()
                .min_by(|&&a, &&b| {
                    values[a]
                        .total_cmp(&values[b])
                        .then_with(|| lex_cmp(grid.point(a), grid.point(b)))
                })
                .expect("non-empty group")
        })
        .collect();
    reps.sort_by(|&a, &b| lex_cmp(grid.point(a), grid.point(b)));
    Ok(MinimaCluster {
        points: reps.iter().map(|&i| grid.point(i).to_vec()).collect(),
        values: reps.iter().map(|&i| values[i]).collect(),
        indices: reps,
        value: min,
        tol_val,
        tol_sep,
    })
}

/// Connected components of `items` under the relation `distance < sep`.
pub(crate) fn single_linkage(grid: &Grid, items: &[usize], sep: f64) -> Vec<Vec<usize>> {
    let n = items.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }

    let dim = grid.dim();
    let cell_of = |p: &[f64]| -> Vec<i64> { p.iter().map(|c| (c / sep).floor() as i64).collect() };
    let mut cells: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for (k, &i) in items.iter().enumerate() {
        cells.entry(cell_of(grid.point(i))).or_default().push(k);
    }
    let offsets: Vec<Vec<i64>> = (0..3usize.pow(dim as u32))
        .map(|mut code| {
            (0..dim)
                .map(|_| {
                    let o = (code % 3) as i64 - 1;
                    code /= 3;
                    o
                })
                .collect()
        })
        .collect();
    for (k, &i) in items.iter().enumerate() {
        let p = grid.point(i);
        let base = cell_of(p);
        for off in &offsets {
            let key: Vec<i64> = base.iter().zip(off).map(|(b, o)| b + o).collect();
            let Some(bucket) = cells.get(&key) else { continue };
            for &l in bucket {
                if l > k && distance(p, grid.point(items[l])) < sep {
                    let (a, b) = (find(&mut parent, k), find(&mut parent, l));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for (k, &item) in items.iter().enumerate() {
        let root = find(&mut parent, k);
        groups.entry(root).or_default().push(item);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort_by_key(|g| g[0]);
    out
}
