//! Benchmark fixtures shared by the criterion targets.

use std::sync::Arc;

use minimax_core::{BivariateField, ExtReal, Grid, MultiplierProblem, ScalarField};

pub fn double_well(n: usize) -> ScalarField {
    ScalarField::from_expr(Arc::new(Grid::uniform_1d(-2.0, 2.0, n).unwrap()), "(x^2-1)^2").unwrap()
}

/// `J = x`, `Φ = x²` on `[−10, 10]` with `]a, b[ = ]0, +∞[`.
pub fn linear_quadratic(n: usize) -> MultiplierProblem {
    let g = Arc::new(Grid::uniform_1d(-10.0, 10.0, n).unwrap());
    MultiplierProblem::new(
        ScalarField::from_expr(g.clone(), "x").unwrap(),
        ScalarField::from_expr(g, "x^2").unwrap(),
        ExtReal::Finite(0.0),
        ExtReal::PosInf,
    )
    .unwrap()
}

/// A smooth saddle `(x − y)² − y²/2` on `[0, 1]²`.
pub fn saddle(n: usize) -> BivariateField {
    let g = Arc::new(Grid::uniform_1d(0.0, 1.0, n).unwrap());
    BivariateField::from_expr(g.clone(), g, "(x1 - x2)^2 - x2^2/2").unwrap()
}
