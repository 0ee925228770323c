use std::sync::Arc;

use minimax_core::integral::{
    jensen_check, log_inequality_check, log_inequality_suite, log_power_suite, verify_eq82, Eq82Opts, Hypothesis,
    IntegralError, LogPowerFamily, WeightedSpace,
};
use minimax_core::{Grid, ScalarField};

fn pair(phi: &str, psi: &str, n: usize) -> (ScalarField, ScalarField) {
    let g = Arc::new(Grid::uniform_1d(-10.0, 10.0, n).unwrap());
    (
        ScalarField::from_expr(g.clone(), phi).unwrap(),
        ScalarField::from_expr(g, psi).unwrap(),
    )
}

#[test]
fn linear_objective_on_quadratic_level() {
    let (phi, psi) = pair("x", "x^2", 2001);
    let w = WeightedSpace::new(vec![1.0, 1.0, 1.0], 2.0).unwrap();
    let rep = verify_eq82(&phi, &psi, &w, 1.0, 10_000, 42, &Eq82Opts::default()).unwrap();
    assert_eq!(rep.rhs, -3.0);
    assert_eq!(rep.level_argmin, vec![-1.0]);
    assert_eq!(rep.achieving.objective, -3.0);
    assert!(matches!(rep.hypothesis, Hypothesis::UniqueAlongPath { .. }));
    assert_eq!(rep.violations, 0);
    assert!(rep.probe_violation.is_none());
    assert!(rep.passed);
    assert_eq!(rep.projected + rep.accepted_by_rejection, 10_000);
    assert!(rep.worst.unwrap().objective >= rep.rhs - rep.tol);
}

#[test]
fn same_seed_same_report() {
    let (phi, psi) = pair("x", "x^2", 2001);
    let w = WeightedSpace::new(vec![0.5, 2.0], 1.0).unwrap();
    let a = verify_eq82(&phi, &psi, &w, 2.25, 3000, 7, &Eq82Opts::default()).unwrap();
    let b = verify_eq82(&phi, &psi, &w, 2.25, 3000, 7, &Eq82Opts::default()).unwrap();
    assert_eq!(a, b);
    // √2 is not a grid point.
    assert!(matches!(
        verify_eq82(&phi, &psi, &w, 2.0, 10, 7, &Eq82Opts::default()),
        Err(IntegralError::LevelNotAttained { .. })
    ));
}

#[test]
fn rhs_decreases_with_r() {
    // The level infimum of φ = y on ψ = y² is −√r.
    let (phi, psi) = pair("x", "x^2", 2001);
    let w = WeightedSpace::new(vec![1.0, 3.0], 1.0).unwrap();
    let mut last = f64::INFINITY;
    for r in [0.25, 1.0, 2.25, 4.0, 9.0] {
        let rep = verify_eq82(&phi, &psi, &w, r, 200, 1, &Eq82Opts::default()).unwrap();
        assert!((rep.rhs + r.sqrt() * 4.0).abs() < 1e-12);
        assert!(rep.rhs <= last);
        last = rep.rhs;
    }
}

#[test]
fn non_unique_counterexample_fails_identity() {
    let (phi, psi) = pair("min(x,1)^2 - (max(x,1) - 1)", "x^2", 2001);
    let w = WeightedSpace::new(vec![1.0, 2.0, 0.5], 2.0).unwrap();
    let rep = verify_eq82(&phi, &psi, &w, 1.0, 2000, 42, &Eq82Opts::default()).unwrap();
    assert_eq!(rep.level_inf, 1.0);
    assert_eq!(rep.rhs, 3.5);
    match &rep.hypothesis {
        Hypothesis::NonUnique { lambda, points } => {
            assert!((lambda - 0.125).abs() < 1e-9, "{lambda}");
            assert_eq!(points, &vec![vec![0.0], vec![4.0]]);
        }
        h => panic!("{h:?}"),
    }
    assert!(!rep.identity_guaranteed);
    let probe = rep.probe_violation.clone().unwrap();
    assert_eq!(probe.tuple, vec![vec![0.0]; 3]);
    assert_eq!(probe.objective, 0.0);
    assert!(!rep.passed);
}

#[test]
fn zero_weight_is_rejected() {
    assert!(WeightedSpace::new(vec![1.0, 0.0, 2.0], 1.0).is_err());
}

#[test]
fn jensen_constant_tuple_is_exact() {
    let f = LogPowerFamily {
        p: 2.5,
        a0: 1.0,
        terms: vec![(0.5, 1.0), (2.0, 0.3)],
    };
    f.validate().unwrap();
    let w = WeightedSpace::new(vec![0.3, 1.7, 0.01, 4.0], 2.5).unwrap();
    for c in [0.0, 0.7, 3.0, 11.0] {
        let r = jensen_check(|y| f.eval(y), &w, &[c; 4]).unwrap();
        assert!(r.equal, "{c}: {r:?}");
        let r = log_inequality_check(&w, &[-c; 4]).unwrap();
        assert!(r.equal, "{c}: {r:?}");
    }
}

#[test]
fn log_power_family_rejects_large_exponent() {
    let f = LogPowerFamily {
        p: 1.0,
        a0: 1.0,
        terms: vec![(1.0, 1.0)],
    };
    assert!(f.validate().is_err());
}

#[test]
fn randomized_suites_have_no_violations() {
    let s = log_inequality_suite(10_000, 42).unwrap();
    assert_eq!(s.violations, 0);
    assert_eq!(s.constant_exact, s.constant_checks);
    let s = log_power_suite(1_000, 42).unwrap();
    assert!(s.passed, "{s:?}");
}
