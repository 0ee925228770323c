use std::sync::Arc;

use minimax_core::minimax::{classify_alternative, cover_sup_inf, sup_inf, Alternative, MinimaxTol};
use minimax_core::multiplier_path::{alpha_beta, scan_constrained, MultiplierProblem, SolveOpts};
use minimax_core::{global_minima_with, parse_expr, BivariateField, ClusterTol, ExtReal, Grid, ScalarField};
use proptest::prelude::*;

fn poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn minimum_value_is_the_grid_minimum(values in prop::collection::vec(-1e3f64..1e3, 2..200)) {
        let g = Arc::new(Grid::uniform_1d(0.0, 1.0, values.len()).unwrap());
        let f = ScalarField::from_values(g, values.clone()).unwrap();
        let m = global_minima_with(&f, ClusterTol::default()).unwrap();
        prop_assert_eq!(m.value, values.iter().copied().fold(f64::INFINITY, f64::min));
        for w in m.points.windows(2) {
            prop_assert!((w[1][0] - w[0][0]).abs() >= m.tol_sep);
        }
    }

    #[test]
    fn refining_never_raises_the_minimum(coeffs in prop::collection::vec(-3f64..3.0, 1..6), n in 3usize..300) {
        let c = coeffs.clone();
        let coarse = ScalarField::tabulate(Arc::new(Grid::uniform_1d(-2.0, 2.0, n).unwrap()), move |x| poly(&c, x[0])).unwrap();
        let c = coeffs.clone();
        let fine = ScalarField::tabulate(Arc::new(Grid::uniform_1d(-2.0, 2.0, 2 * n - 1).unwrap()), move |x| poly(&c, x[0])).unwrap();
        let a = global_minima_with(&coarse, ClusterTol::default()).unwrap();
        let b = global_minima_with(&fine, ClusterTol::default()).unwrap();
        prop_assert!(b.value <= a.value + a.tol_val);
    }

    #[test]
    fn parsing_is_pure(a in -5f64..5.0, b in -5f64..5.0, x in -3f64..3.0) {
        let text = format!("{a}*x1^3 - exp(-abs(x1)) + max(x1, {b})");
        let e1 = parse_expr(&text, 1).unwrap();
        let e2 = parse_expr(&text, 1).unwrap();
        prop_assert_eq!(e1.eval(&[x]).to_bits(), e2.eval(&[x]).to_bits());
    }

    #[test]
    fn affine_in_y_is_never_inconclusive(a in prop::collection::vec(-2f64..2.0, 8), b in prop::collection::vec(-2f64..2.0, 8)) {
        let xg = Arc::new(Grid::uniform_1d(0.0, 1.0, 8).unwrap());
        let yg = Arc::new(Grid::uniform_1d(0.0, 1.0, 41).unwrap());
        let values: Vec<f64> = (0..8).flat_map(|i| { let (a, b) = (a[i], b[i]); (0..41).map(move |j| a + b * j as f64 / 40.0) }).collect();
        let f = BivariateField::from_values(xg, yg, values).unwrap();
        // X is a discrete 8-point set: any two distinct points are separated.
        let tol = MinimaxTol { tol_sep: Some(1e-3), ..MinimaxTol::default() };
        let rep = classify_alternative(&f, &tol).unwrap();
        let inconclusive = matches!(rep.alternative, Alternative::Inconclusive { .. });
        prop_assert!(!inconclusive, "{:?}", rep.alternative);
    }

    #[test]
    fn nested_prefix_cover_gives_sup_inf(values in prop::collection::vec(-1f64..1.0, 30)) {
        let f = BivariateField::from_values(
            Arc::new(Grid::uniform_1d(0.0, 1.0, 3).unwrap()),
            Arc::new(Grid::uniform_1d(0.0, 1.0, 10).unwrap()),
            values,
        ).unwrap();
        let cover: Vec<Vec<usize>> = (1..=10).map(|k| (0..k).collect()).collect();
        prop_assert_eq!(cover_sup_inf(&f, &cover).unwrap(), sup_inf(&f));
    }

    #[test]
    fn alpha_never_exceeds_beta(j in prop::collection::vec(-1f64..1.0, 40), phi in prop::collection::vec(0f64..1.0, 40)) {
        let g = Arc::new(Grid::uniform_1d(0.0, 1.0, 40).unwrap());
        let p = MultiplierProblem::new(
            ScalarField::from_values(g.clone(), j).unwrap(),
            ScalarField::from_values(g, phi).unwrap(),
            ExtReal::Finite(0.0),
            ExtReal::PosInf,
        ).unwrap();
        let ab = alpha_beta(&p).unwrap();
        prop_assert!(ab.alpha <= ab.beta);
    }

    #[test]
    fn dual_function_is_midpoint_concave(j in prop::collection::vec(-1f64..1.0, 60), phi in prop::collection::vec(0f64..1.0, 60)) {
        let g = Arc::new(Grid::uniform_1d(0.0, 1.0, 60).unwrap());
        let p = MultiplierProblem::new(
            ScalarField::from_values(g.clone(), j).unwrap(),
            ScalarField::from_values(g, phi).unwrap(),
            ExtReal::Finite(0.0),
            ExtReal::PosInf,
        ).unwrap();
        let ls: Vec<f64> = (0..50).map(|k| 0.1 * k as f64).collect();
        for w in ls.windows(3) {
            let mid = p.lagrangian_min(w[1]);
            let chord = 0.5 * (p.lagrangian_min(w[0]) + p.lagrangian_min(w[2]));
            prop_assert!(mid >= chord - 1e-12);
        }
    }
}

#[test]
fn constrained_values_move_continuously() {
    let g = Arc::new(Grid::uniform_1d(-10.0, 10.0, 20_001).unwrap());
    let p = MultiplierProblem::new(
        ScalarField::from_expr(g.clone(), "x").unwrap(),
        ScalarField::from_expr(g, "x^2").unwrap(),
        ExtReal::Finite(0.0),
        ExtReal::PosInf,
    )
    .unwrap();
    let rs: Vec<f64> = (1..=40).map(|k| 0.25 * k as f64).collect();
    let certs: Vec<_> = scan_constrained(&p, &rs, &SolveOpts::default())
        .into_iter()
        .map(Result::unwrap)
        .collect();
    // |d/dr (−√r)| <= 1 for r >= 0.25, plus two grid steps of slack.
    for w in certs.windows(2) {
        assert!((w[1].j_value - w[0].j_value).abs() <= 0.25 + 2e-3);
    }
}
