use std::sync::Arc;

use minimax_core::minimax::{
    classify_alternative, inf_sup, simplex_sup_inf, sup_inf, Alternative, Diagnostic, MinimaxTol,
};
use minimax_core::{BivariateField, Grid, GridSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn two_point_table() -> BivariateField {
    let x = Arc::new(Grid::explicit_1d(&[0.0, 1.0]).unwrap());
    let y = Arc::new(Grid::uniform_1d(0.0, 1.0, 101).unwrap());
    BivariateField::tabulate(x, y, |x, y| {
        if x[0] == 0.0 {
            y[0]
        } else if y[0] > 0.0 {
            -y[0]
        } else {
            1.0
        }
    })
    .unwrap()
}

#[test]
fn two_point_table_has_a_gap_but_no_two_minima() {
    let f = two_point_table();
    assert_eq!(sup_inf(&f), 0.0);
    assert_eq!(inf_sup(&f), 1.0);
    let rep = classify_alternative(&f, &MinimaxTol::default()).unwrap();
    assert!(!rep.gap_closed);
    assert!(rep.two_minima.is_none());
    match rep.alternative {
        Alternative::Inconclusive {
            diagnostic: Diagnostic::Discontinuity { x, y_left, y_right, .. },
        } => {
            assert_eq!(x, vec![1.0]);
            assert_eq!(y_left, vec![0.0]);
            assert_eq!(y_right, vec![0.01]);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn weak_duality_on_random_fields() {
    let x = Arc::new(Grid::uniform_1d(0.0, 1.0, 50).unwrap());
    let y = Arc::new(Grid::uniform_1d(0.0, 1.0, 50).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..1000 {
        let values: Vec<f64> = (0..2500).map(|_| rng.random_range(-1.0..1.0)).collect();
        let f = BivariateField::from_values(x.clone(), y.clone(), values.clone()).unwrap();
        let (si, is) = (sup_inf(&f), inf_sup(&f));
        assert!(si <= is);
        // Oracle: the definitions, looped directly.
        let oracle_si = (0..50)
            .map(|j| (0..50).map(|i| values[i * 50 + j]).fold(f64::INFINITY, f64::min))
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(si, oracle_si);
    }
}

/// `sup` over the barycentric lattice `{k/K}` of `min_x f(x, λ)`.
fn lattice_sup(points: &[Vec<f64>], n: usize, k: usize, f: impl Fn(&[f64], &[f64]) -> f64) -> f64 {
    let mut best = f64::NEG_INFINITY;
    let mut lam = vec![0.0; n];
    let kf = k as f64;
    let mut visit = |lam: &[f64]| {
        let v = points.iter().map(|x| f(x, lam)).fold(f64::INFINITY, f64::min);
        best = best.max(v);
    };
    match n {
        2 => {
            for i in 0..=k {
                lam[0] = i as f64 / kf;
                lam[1] = (k - i) as f64 / kf;
                visit(&lam);
            }
        }
        3 => {
            for i in 0..=k {
                for j in 0..=k - i {
                    lam[0] = i as f64 / kf;
                    lam[1] = j as f64 / kf;
                    lam[2] = (k - i - j) as f64 / kf;
                    visit(&lam);
                }
            }
        }
        _ => unreachable!(),
    }
    best
}

fn dot(x: &[f64], l: &[f64]) -> f64 {
    x.iter().zip(l).map(|(a, b)| a * b).sum()
}

#[test]
fn simplex_recursion_matches_lattice_on_affine_fixtures() {
    // min_i λ_i / w_i peaks at λ = w / Σw.
    let cases: Vec<Vec<Vec<f64>>> = vec![
        vec![vec![1.0, 0.0], vec![0.0, 1.0 / 3.0]],
        vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 0.5]],
        // Third coordinate dominates: the sup sits at a vertex.
        vec![vec![0.2, -0.4, 1.1], vec![-0.3, 0.5, 0.9], vec![0.1, 0.1, 0.7]],
    ];
    for points in cases {
        let n = points[0].len();
        let spec = GridSpec::Explicit { points: points.clone() };
        let got = simplex_sup_inf(dot, &spec, n, 10_001).unwrap();
        let want = lattice_sup(&points, n, if n == 2 { 100_000 } else { 4000 }, dot);
        assert!((got.value - want).abs() <= 1e-6, "n={n}: {} vs {want}", got.value);
    }
}

#[test]
fn simplex_recursion_matches_lattice_on_quadratic() {
    let centers = [[0.7, 0.5, -0.1], [0.0, 0.2, 0.9]];
    let f = |x: &[f64], l: &[f64]| {
        let c = &centers[x[0] as usize];
        -l.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
    };
    let spec = GridSpec::explicit_1d(&[0.0, 1.0]);
    let got = simplex_sup_inf(f, &spec, 3, 1001).unwrap();
    let want = lattice_sup(&[vec![0.0], vec![1.0]], 3, 1500, f);
    assert!((got.value - want).abs() <= 1e-3, "{} vs {want}", got.value);
}
