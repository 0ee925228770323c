//! Tabulated scalar and bivariate fields.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::FieldError;
use crate::expr::{parse_expr, Expr};
use crate::grid::{Grid, GridSpec};

pub type Evaluator = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A real function sampled on a grid.
///
/// Values are always tabulated; expression- or closure-backed fields keep
/// their evaluator so that off-grid probes (finite differences, sphere
/// sampling) see the exact function.
#[derive(Clone)]
pub struct ScalarField {
    grid: Arc<Grid>,
    values: Arc<Vec<f64>>,
    eval: Option<Evaluator>,
}

impl ScalarField {
    pub fn tabulate<F>(grid: Arc<Grid>, f: F) -> Result<Self, FieldError>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        let values: Vec<f64> = (0..grid.len()).into_par_iter().map(|i| f(grid.point(i))).collect();
        check_finite(&grid, &values)?;
        Ok(ScalarField {
            grid,
            values: Arc::new(values),
            eval: Some(Arc::new(f)),
        })
    }

    pub fn from_expr(grid: Arc<Grid>, text: &str) -> Result<Self, FieldError> {
        let expr = parse_expr(text, grid.dim())?;
        Self::from_parsed(grid, expr)
    }

    pub fn from_parsed(grid: Arc<Grid>, expr: Expr) -> Result<Self, FieldError> {
        Self::tabulate(grid, move |x| expr.eval(x))
    }

    pub fn from_values(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self, FieldError> {
        if values.len() != grid.len() {
            return Err(FieldError::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        check_finite(&grid, &values)?;
        Ok(ScalarField {
            grid,
            values: Arc::new(values),
            eval: None,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn has_evaluator(&self) -> bool {
        self.eval.is_some()
    }

    /// Value at an arbitrary point: the evaluator when there is one,
    /// otherwise the table entry at a grid point within `1e-9·(1+spacing)`.
    pub fn eval_at(&self, x: &[f64]) -> Option<f64> {
        match &self.eval {
            Some(f) => Some(f(x)),
            None => self
                .grid
                .locate(x, 1e-9 * (1.0 + self.grid.spacing()))
                .map(|i| self.values[i]),
        }
    }

    pub fn evaluator(&self) -> Option<&Evaluator> {
        self.eval.as_ref()
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn same_domain(&self, other: &ScalarField) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || self.grid.spec() == other.grid.spec()
    }

    /// Pointwise `op(self, other)`; both fields must share a domain.
    pub fn zip_with<F>(&self, other: &ScalarField, op: F) -> Result<ScalarField, FieldError>
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + Clone + 'static,
    {
        if !self.same_domain(other) {
            return Err(FieldError::DomainMismatch);
        }
        let values: Vec<f64> = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(&a, &b)| op(a, b))
            .collect();
        check_finite(&self.grid, &values)?;
        let eval: Option<Evaluator> = match (&self.eval, &other.eval) {
            (Some(f), Some(g)) => {
                let (f, g) = (f.clone(), g.clone());
                Some(Arc::new(move |x: &[f64]| op(f(x), g(x))))
            }
            _ => None,
        };
        Ok(ScalarField {
            grid: self.grid.clone(),
            values: Arc::new(values),
            eval,
        })
    }

    /// Pointwise `op(self)`.
    pub fn map<F>(&self, op: F) -> Result<ScalarField, FieldError>
    where
        F: Fn(f64) -> f64 + Send + Sync + Clone + 'static,
    {
        let values: Vec<f64> = self.values.iter().map(|&a| op(a)).collect();
        check_finite(&self.grid, &values)?;
        let eval: Option<Evaluator> = self.eval.as_ref().map(|f| {
            let f = f.clone();
            Arc::new(move |x: &[f64]| op(f(x))) as Evaluator
        });
        Ok(ScalarField {
            grid: self.grid.clone(),
            values: Arc::new(values),
            eval,
        })
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("domain", self.grid.spec())
            .field("len", &self.values.len())
            .field("has_evaluator", &self.eval.is_some())
            .finish()
    }
}

impl Serialize for ScalarField {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("ScalarField", 2)?;
        st.serialize_field("domain", self.grid.spec())?;
        st.serialize_field("values", self.values.as_slice())?;
        st.end()
    }
}

/// JSON form of a tabulated field: `{domain, values}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldTable {
    pub domain: GridSpec,
    pub values: Vec<f64>,
}

impl TryFrom<FieldTable> for ScalarField {
    type Error = FieldError;

    fn try_from(t: FieldTable) -> Result<Self, FieldError> {
        ScalarField::from_values(Arc::new(Grid::new(t.domain)?), t.values)
    }
}

/// A function of `(x, y)` tabulated on the product of two grids, stored
/// x-major: entry `(i, j)` lives at `i * ny + j`.
#[derive(Clone)]
pub struct BivariateField {
    x: Arc<Grid>,
    y: Arc<Grid>,
    values: Arc<Vec<f64>>,
}

impl BivariateField {
    pub fn tabulate<F>(x: Arc<Grid>, y: Arc<Grid>, f: F) -> Result<Self, FieldError>
    where
        F: Fn(&[f64], &[f64]) -> f64 + Send + Sync,
    {
        let ny = y.len();
        let values: Vec<f64> = (0..x.len() * ny)
            .into_par_iter()
            .map(|k| f(x.point(k / ny), y.point(k % ny)))
            .collect();
        Self::checked(x, y, values)
    }

    /// Expression in `x1..xk` where the first `dim(X)` variables are the
    /// x-coordinates and the rest the y-coordinates.
    pub fn from_expr(x: Arc<Grid>, y: Arc<Grid>, text: &str) -> Result<Self, FieldError> {
        let dx = x.dim();
        let expr = parse_expr(text, dx + y.dim())?;
        Self::tabulate(x, y, move |a, b| {
            let mut buf = [0.0f64; 16];
            if a.len() + b.len() <= buf.len() {
                buf[..dx].copy_from_slice(a);
                buf[dx..dx + b.len()].copy_from_slice(b);
                expr.eval(&buf[..dx + b.len()])
            } else {
                let v: Vec<f64> = a.iter().chain(b).copied().collect();
                expr.eval(&v)
            }
        })
    }

    pub fn from_values(x: Arc<Grid>, y: Arc<Grid>, values: Vec<f64>) -> Result<Self, FieldError> {
        if values.len() != x.len() * y.len() {
            return Err(FieldError::LengthMismatch {
                expected: x.len() * y.len(),
                got: values.len(),
            });
        }
        Self::checked(x, y, values)
    }

    fn checked(x: Arc<Grid>, y: Arc<Grid>, values: Vec<f64>) -> Result<Self, FieldError> {
        let ny = y.len();
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            let mut point = x.point(k / ny).to_vec();
            point.extend_from_slice(y.point(k % ny));
            return Err(FieldError::NonFinite {
                index: k,
                point,
                value: values[k],
            });
        }
        Ok(BivariateField {
            x,
            y,
            values: Arc::new(values),
        })
    }

    pub fn x_grid(&self) -> &Arc<Grid> {
        &self.x
    }

    pub fn y_grid(&self) -> &Arc<Grid> {
        &self.y
    }

    pub fn nx(&self) -> usize {
        self.x.len()
    }

    pub fn ny(&self) -> usize {
        self.y.len()
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.y.len() + j]
    }

    /// The y-line `j ↦ f(x_i, y_j)`.
    pub fn row(&self, i: usize) -> &[f64] {
        let ny = self.y.len();
        &self.values[i * ny..(i + 1) * ny]
    }

    /// The x-slice `i ↦ f(x_i, y_j)`.
    pub fn slice_at_y(&self, j: usize) -> Vec<f64> {
        (0..self.x.len()).map(|i| self.value(i, j)).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl fmt::Debug for BivariateField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BivariateField")
            .field("x_domain", self.x.spec())
            .field("y_domain", self.y.spec())
            .finish()
    }
}

impl Serialize for BivariateField {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("BivariateField", 3)?;
        st.serialize_field("x_domain", self.x.spec())?;
        st.serialize_field("y_domain", self.y.spec())?;
        st.serialize_field("values", self.values.as_slice())?;
        st.end()
    }
}

fn check_finite(grid: &Grid, values: &[f64]) -> Result<(), FieldError> {
    if grid.is_empty() {
        return Err(FieldError::EmptyGrid);
    }
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(FieldError::NonFinite {
            index: i,
            point: grid.point(i).to_vec(),
            value: values[i],
        }),
        None => Ok(()),
    }
}
