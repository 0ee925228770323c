//! Grid-scale solvers for minimax alternatives, multiplier paths, spherical
//! maxima, the strict-minimax quantity θ, multiplicity of global minima and
//! weighted integral identities.
//!
//! Everything works on finite grids: fields are tabulated once, and every
//! "minimum" is an ε-cluster of grid points (see [`minima`]).

// NaN-rejecting checks are written as negated comparisons on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod expr;
pub mod ext_real;
pub mod field;
pub mod grid;
pub mod integral;
pub mod minima;
pub mod minimax;
pub mod multiplicity;
pub mod multiplier_path;
pub mod spherical;
pub mod strict_minimax;

pub use error::FieldError;
pub use expr::{parse_expr, Expr, ExprError};
pub use ext_real::ExtReal;
pub use field::{BivariateField, FieldTable, ScalarField};
pub use grid::{Grid, GridSpec};
pub use integral::WeightedSpace;
pub use minima::{global_minima, global_minima_with, minima_of_values, ClusterTol, MinimaCluster};
pub use minimax::{classify_alternative, Alternative, MinimaxReport, MinimaxTol};
pub use multiplicity::MultiplicityFinding;
pub use multiplier_path::{solve_constrained, MultiplierProblem, SolveOpts, WellPosedCertificate};
pub use spherical::{SphericalProblem, SphericalReport};
pub use strict_minimax::{ThetaProblem, ThetaResult};
