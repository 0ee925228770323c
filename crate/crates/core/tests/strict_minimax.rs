use std::sync::Arc;

use minimax_core::strict_minimax::{
    check_theta_lower_bound, remark_checks, strict_gap_witness, theta, theta_quadratic, ThetaProblem,
};
use minimax_core::{ClusterTol, ExtReal, Grid, ScalarField};

fn field(text: &str) -> ScalarField {
    ScalarField::from_expr(Arc::new(Grid::uniform_1d(-2.0, 2.0, 401).unwrap()), text).unwrap()
}

/// Brute force: minima by a plain scan, ratios over every pair with x ≠ u.
fn theta_oracle(j: &ScalarField) -> f64 {
    let xs = j.grid().coords_1d().unwrap();
    let v = j.values();
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let mut best = f64::INFINITY;
    for (iu, &u) in xs.iter().enumerate() {
        if v[iu] > min + 1e-12 {
            continue;
        }
        for (ix, &x) in xs.iter().enumerate() {
            if (x - u).abs() > 2.0 * j.grid().spacing() {
                best = best.min((v[ix] - v[iu]) / ((x - u) * (x - u)));
            }
        }
    }
    best
}

#[test]
fn theta_of_the_two_fixtures() {
    for (text, want) in [("(x^2-1)^2", 0.0), ("x^2", 1.0)] {
        let j = field(text);
        let t = theta_quadratic(&j, |x| x.to_vec(), ClusterTol::default()).unwrap();
        let got = t.theta.finite().unwrap();
        assert!((got - want).abs() <= 1e-9, "{text}: {got}");
        assert!((got - theta_oracle(&j)).abs() <= 1e-12, "{text}");
        let p = ThetaProblem::quadratic(j, |x| x.to_vec()).unwrap();
        assert_eq!(theta(&p).unwrap().theta, t.theta);
    }
}

#[test]
fn remark_invariants_hold_on_both_fixtures() {
    for text in ["(x^2-1)^2", "x^2"] {
        let p = ThetaProblem::quadratic(field(text), |x| x.to_vec()).unwrap();
        let t = theta(&p).unwrap().theta;
        let r = remark_checks(&p, t).unwrap();
        assert!(r.minimality_equivalence, "{text}: {:?}", r.equivalence_failures);
        assert!(r.lambda_constant_on_minima, "{text}");
    }
}

#[test]
fn strict_gap_for_mu_above_theta() {
    let all = vec![(0..401).collect::<Vec<usize>>()];
    for text in ["(x^2-1)^2", "x^2"] {
        let p = ThetaProblem::quadratic(field(text), |x| x.to_vec()).unwrap();
        let t = theta(&p).unwrap().theta.finite().unwrap();
        let w = strict_gap_witness(&p, t + 0.5, &all).unwrap();
        assert!(w.sides.lhs < w.sides.rhs, "{text}: {:?}", w.sides);
        // The right side is inf J over the member.
        assert_eq!(w.sides.rhs, p.j.min_value());
    }
}

#[test]
fn witness_on_a_two_member_cover() {
    // Overlapping halves share a middle block, but pairs across the ends are
    // not covered, so the cover is rejected.
    let left: Vec<usize> = (0..250).collect();
    let right: Vec<usize> = (150..401).collect();
    let p = ThetaProblem::quadratic(field("(x^2-1)^2"), |x| x.to_vec()).unwrap();
    assert!(strict_gap_witness(&p, 1.0, &[left.clone(), right.clone()]).is_err());
    let all: Vec<usize> = (0..401).collect();
    let w = strict_gap_witness(&p, 1.0, &[left, right, all]).unwrap();
    assert_eq!(w.sides.member, 2);
}

#[test]
fn lower_bound_direction() {
    let all = vec![(0..401).collect::<Vec<usize>>()];
    let q = ThetaProblem::quadratic(field("x^2"), |x| x.to_vec()).unwrap();
    assert!(check_theta_lower_bound(&q, 0.5, &all).unwrap().holds);
    assert!(!check_theta_lower_bound(&q, 2.0, &all).unwrap().holds);
}

#[test]
fn generic_problem_with_absolute_penalty() {
    // φ(y) = |y|, Ψ(x, λ) = x − λ, λ_x = x: θ = inf (J(x) − J(u)) / |x − u|.
    let j = field("abs(x1)");
    let p = ThetaProblem::new(
        j,
        Arc::new(|y: &[f64]| y[0].abs()),
        Arc::new(|x: &[f64], l: &[f64]| vec![x[0] - l[0]]),
        Arc::new(|x: &[f64]| x.to_vec()),
        vec![0.0],
        Some(Arc::new(Grid::uniform_1d(-4.0, 4.0, 81).unwrap())),
    )
    .unwrap();
    assert_eq!(theta(&p).unwrap().theta, ExtReal::Finite(1.0));
}

#[test]
fn invalid_penalty_is_rejected() {
    let bad = ThetaProblem::new(
        field("x^2"),
        Arc::new(|y: &[f64]| y[0] * y[0] + 1.0),
        Arc::new(|x: &[f64], l: &[f64]| vec![x[0] - l[0]]),
        Arc::new(|x: &[f64]| x.to_vec()),
        vec![0.0],
        None,
    );
    assert!(bad.is_err());
}
