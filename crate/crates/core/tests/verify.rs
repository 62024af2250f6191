mod common;

use common::*;
use halfspace::discretization::GridSpec;
use halfspace::kernels::Dimension;
use halfspace::verify::*;
use halfspace::Error;

#[test]
fn kernel_suites_pass_in_every_dimension() {
    for dim in [Dimension::Two, Dimension::Three] {
        let reports = verify_kernel_identities(dim, 10_000, 5);
        assert_eq!(reports.len(), 6);
        for r in reports {
            assert!(r.passed, "{r:?}");
            assert_eq!(r.passed, r.statistic <= r.threshold || r.name.starts_with("poisson_comparison"));
        }
    }
}

#[test]
fn kernel_suite_is_reproducible_from_its_seed() {
    let a = verify_kernel_identities(Dimension::One, 500, 9);
    let b = verify_kernel_identities(Dimension::One, 500, 9);
    assert_eq!(a, b);
}

#[test]
fn gintest_slope_is_stable_when_the_heights_are_thinned() {
    for (n, s, theta) in [(1, 1.0, -1.5), (3, 1.5, -0.8)] {
        let dim = Dimension::try_from(n).unwrap();
        let full = verify_gintest_scaling(dim, s, theta, &GINTEST_HEIGHTS).unwrap();
        let half: Vec<f64> = GINTEST_HEIGHTS.iter().step_by(2).copied().collect();
        let thin = verify_gintest_scaling(dim, s, theta, &half).unwrap();
        assert!(full.passed && thin.passed);
        let slope = |r: &CheckReport| r.statistic;
        assert!((slope(&full) - slope(&thin)).abs() <= 0.02, "{full:?} {thin:?}");
    }
}

#[test]
fn inadmissible_exponents_are_rejected() {
    assert!(matches!(verify_gintest_scaling(Dimension::Three, 3.5, 0.0, &GINTEST_HEIGHTS), Err(Error::Precondition(_))));
    assert!(matches!(verify_glaa_sharpness(Dimension::One, 2.0, 0.4), Err(Error::Precondition(_))));
    assert!(matches!(
        verify_glaa_boundedness(GridSpec::half_line(10.0, 100, 2.0), (4.0, 0.0, 2.0, 0.0), 4, 1),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn sharpness_holds_in_higher_dimensions() {
    for dim in [Dimension::Two, Dimension::Three] {
        for sigma in [0.6, 0.8] {
            assert!(verify_glaa_sharpness(dim, 2.0, sigma).unwrap().passed);
        }
    }
}

#[test]
fn structure_check_fails_above_the_threshold() {
    let problem = half_line_problem(20.0, 400, 2.0, 3.0);
    let ok = verify_solution_structure(&problem, &[0.8, 0.2, 0.4], 8).unwrap();
    assert!(ok.passed, "{ok:?}");
    let bad = verify_solution_structure(&problem, &[0.5, 1.6], 8).unwrap();
    assert!(!bad.passed);
}

#[test]
fn reports_serialize_to_json() {
    let r = verify_glaa_sharpness(Dimension::One, 2.0, 0.8).unwrap();
    let v = serde_json::to_value(&r).unwrap();
    for key in ["name", "passed", "statistic", "threshold", "details", "samples"] {
        assert!(v.get(key).is_some(), "{key}");
    }
}
