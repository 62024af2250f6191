mod common;

use std::sync::{Arc, OnceLock};

use common::*;
use halfspace::discretization::{build_grid, weighted_norm, Field, GridSpec};
use halfspace::exponents::{check_admissible, tau, DSetParams, scaling_gap};
use halfspace::kernels::{green_g, poisson_p, Dimension, HalfSpacePoint};
use halfspace::operators::{linearization_weight, linearized_spectrum, transfer_singular_values};
use halfspace::solver::{estimate_kappa_star, monotone_iterate, psi_map, IterationOptions, Problem, StartRule};
use proptest::prelude::*;

fn small_problem() -> &'static Problem {
    static CELL: OnceLock<Problem> = OnceLock::new();
    CELL.get_or_init(|| half_line_problem(20.0, 400, 2.0, 3.0))
}

fn dimension() -> impl Strategy<Value = Dimension> {
    prop_oneof![Just(Dimension::One), Just(Dimension::Two), Just(Dimension::Three)]
}

fn point() -> impl Strategy<Value = HalfSpacePoint> {
    (-3.0..3.0f64, -3.0..3.0f64, -3.0..0.5f64).prop_map(|(a, b, e)| HalfSpacePoint::new([a, b], 10f64.powf(e)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn green_is_symmetric_and_positive(dim in dimension(), x in point(), y in point()) {
        let (Ok(a), Ok(b)) = (green_g(dim, &x, &y), green_g(dim, &y, &x)) else { return Ok(()); };
        prop_assert!(a > 0.0);
        prop_assert!((a - b).abs() <= 1e-14 * a.max(b));
        prop_assert!(poisson_p(dim, &x, [y.lateral[0], y.lateral[1]]).unwrap() > 0.0);
    }

    #[test]
    fn norms_are_homogeneous_and_subadditive(
        seed in prop::collection::vec(-2.0..2.0f64, 400),
        shift in prop::collection::vec(-2.0..2.0f64, 400),
        c in -5.0..5.0f64,
        alpha in 0.0..1.0f64,
    ) {
        let grid = small_problem().grid().clone();
        let f = Field::new(grid.clone(), seed).unwrap();
        let g = Field::new(grid, shift).unwrap();
        for q in [1.0, 2.0, 4.0] {
            let nf = weighted_norm(&f, q, alpha);
            prop_assert!((weighted_norm(&f.scaled(c), q, alpha) - c.abs() * nf).abs() <= 1e-12 * (1.0 + nf * c.abs()));
            let sum = f.with_values(f.values().iter().zip(g.values()).map(|(a, b)| a + b).collect()).unwrap();
            prop_assert!(weighted_norm(&sum, q, alpha) <= nf + weighted_norm(&g, q, alpha) + 1e-12);
        }
    }

    #[test]
    fn psi_is_order_preserving(
        base in prop::collection::vec(0.0..1.5f64, 400),
        bump in prop::collection::vec(0.0..0.5f64, 400),
        kappa in 0.05..1.4f64,
    ) {
        let problem = small_problem();
        let v = Field::new(problem.grid().clone(), base.clone()).unwrap();
        let w = Field::new(problem.grid().clone(), base.iter().zip(&bump).map(|(a, b)| a + b).collect()).unwrap();
        let pv = psi_map(problem, &v, kappa).unwrap();
        let pw = psi_map(problem, &w, kappa).unwrap();
        for (a, b) in pv.values().iter().zip(pw.values()) {
            prop_assert!(a <= b);
        }
    }

    #[test]
    fn psi_is_lipschitz_on_bounded_sets(
        a in prop::collection::vec(0.0..0.5f64, 400),
        b in prop::collection::vec(0.0..0.5f64, 400),
    ) {
        // |G[u^p] - G[v^p]| ≤ p M^{p-1} ‖G[1]‖_∞ |u - v| with ‖G[1]‖_∞ ≤ 1
        let problem = small_problem();
        let u = Field::new(problem.grid().clone(), a).unwrap();
        let v = Field::new(problem.grid().clone(), b).unwrap();
        let d = psi_map(problem, &u, 0.3).unwrap().sup_distance(&psi_map(problem, &v, 0.3).unwrap());
        prop_assert!(d <= 3.0 * 0.25 * u.sup_distance(&v) + 1e-15);
    }

    #[test]
    fn admissible_pairs_are_scaling_subcritical(n in 1usize..12, p in 1.05..6.0f64, q in 1.05..30.0f64, alpha in 0.0..2.0f64) {
        let pair = check_admissible(n, p, q, alpha);
        if pair.valid {
            prop_assert!(q > n as f64 * (p - 1.0) / 2.0);
            prop_assert!(scaling_gap(n, p, q, alpha) > 0.0);
            prop_assert!(tau(n, p, q, alpha).unwrap() > 0.0);
        } else {
            prop_assert!(tau(n, p, q, alpha).is_err());
        }
    }

    #[test]
    fn stabilization_index_matches_scan(
        n in 1usize..4, p in 1.3..4.0f64, dq in 0.1..8.0f64, alpha in 0.0..1.0f64, r0 in 1.05..12.0f64, beta0 in -1.0..1.0f64,
    ) {
        let q = p + dq;
        prop_assume!(check_admissible(n, p, q, alpha).valid);
        let Ok(params) = DSetParams::new(n, p, q, alpha, r0, beta0) else { return Ok(()); };
        prop_assert_eq!(params.stabilization_index(), stabilization_by_scan(n, p, q, alpha, r0, beta0));
    }
}

#[test]
fn kernel_matrix_is_nonnegative_and_weight_symmetric() {
    for spec in [
        GridSpec::half_line(20.0, 300, 2.0),
        GridSpec {
            dimension: Dimension::Two,
            lateral_extent: 6.0,
            nodes_lateral: 12,
            ..GridSpec::half_line(6.0, 14, 2.0)
        },
        GridSpec {
            dimension: Dimension::Three,
            lateral_extent: 6.0,
            nodes_lateral: 12,
            ..GridSpec::half_line(6.0, 14, 2.0)
        },
    ] {
        let grid = Arc::new(build_grid(spec).unwrap());
        let k = halfspace::operators::assemble_green(grid.clone()).unwrap();
        let m = k.matrix();
        let w = grid.quad_weights();
        for i in 0..grid.len() {
            for j in 0..grid.len() {
                assert!(m[(i, j)] >= 0.0);
                if i != j {
                    let (a, b) = (m[(i, j)] / w[j], m[(j, i)] / w[i]);
                    assert!((a - b).abs() <= 1e-12 * a.max(b), "{:?} ({i},{j}): {a} vs {b}", spec.dimension);
                }
            }
        }
    }
}

#[test]
fn start_rules_reach_the_same_minimal_solution() {
    let problem = half_line_problem(20.0, 1000, 2.0, 3.0);
    for kappa in [0.3, 0.9] {
        let solve = |start| {
            let opts = IterationOptions {
                start,
                ..IterationOptions::default()
            };
            monotone_iterate(&problem, kappa, &opts).unwrap().solution.unwrap()
        };
        let scaled = solve(StartRule::ScaledTrace);
        assert!(scaled.sup_distance(&solve(StartRule::Zero)) < 1e-7);
        assert!(scaled.sup_distance(&solve(StartRule::Trace)) < 1e-7);
    }
}

#[test]
fn iterates_increase_from_the_scaled_trace() {
    let problem = half_line_problem(20.0, 1000, 2.0, 3.0);
    let opts = IterationOptions {
        record_iterates: 15,
        ..IterationOptions::default()
    };
    let res = monotone_iterate(&problem, 1.0, &opts).unwrap();
    for w in res.iterates.windows(2) {
        for (a, b) in w[0].values().iter().zip(w[1].values()) {
            assert!(a <= b);
        }
    }
    assert!(res.increments.iter().all(|d| *d >= 0.0));
}

#[test]
fn doubling_the_measure_halves_the_threshold() {
    let problem = half_line_problem(20.0, 1000, 2.0, 3.0);
    let opts = IterationOptions::default();
    let single = estimate_kappa_star(&problem, (0.5, 2.5), 2e-3, &opts).unwrap();
    let double = estimate_kappa_star(&problem.with_scaled_measure(2.0), (0.25, 1.25), 1e-3, &opts).unwrap();
    assert!(single.contains(kappa_star_1d(3.0)));
    assert!((2.0 * double.midpoint() - single.midpoint()).abs() <= 2.0 * double.width + single.width);
}

#[test]
fn principal_eigenfield_is_positive() {
    let problem = half_line_problem(20.0, 1000, 2.0, 3.0);
    let u = monotone_iterate(&problem, 0.8, &IterationOptions::default()).unwrap().solution.unwrap();
    let eig = linearized_spectrum(problem.kernel(), &u, 3.0).unwrap();
    assert!(eig.eigenfield.values().iter().all(|v| *v >= 0.0));
    assert!((eig.eigenfield.sup_norm() - 1.0).abs() < 1e-12);
    assert!(eig.residual <= 1e-8);
    assert!((eig.lambda * eig.rho - 1.0).abs() < 1e-12);
}

#[test]
fn transfer_operator_singular_values_decay_quadratically() {
    let problem = half_line_problem(20.0, 1000, 2.0, 3.0);
    let u = monotone_iterate(&problem, 1.2, &IterationOptions::default()).unwrap().solution.unwrap();
    let sv = transfer_singular_values(problem.kernel(), &linearization_weight(u.values(), 3.0)).unwrap();
    // compactness: σ_k k² stays bounded, so σ_40/σ_1 drops below 1e-3
    let scaled: Vec<f64> = (1..=60).map(|k| sv[k - 1] * (k * k) as f64 / sv[0]).collect();
    assert!(scaled.iter().all(|s| *s < 2.0), "{scaled:?}");
    assert!(sv[39] / sv[0] < 1e-3);
}
