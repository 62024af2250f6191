//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use halfspace::discretization::{build_grid, GridSpec};
use halfspace::operators::{assemble_green, poisson_trace, MuSpec};
use halfspace::solver::Problem;

/// `κ* = ((p+1)/2)^{1/(p-1)}` from the first integral of `-u'' + u = u^p` on the half line.
pub fn kappa_star_1d(p: f64) -> f64 {
    ((p + 1.0) / 2.0).powf(1.0 / (p - 1.0))
}

/// Minimal solution for `p = 3` on the half line: `√2 sech(x + a)` with `sech a = κ/√2`.
pub fn soliton_minimal(kappa: f64, x: f64) -> f64 {
    let a = (2f64.sqrt() / kappa).acosh();
    2f64.sqrt() / (x + a).cosh()
}

/// Upper solution for `p = 3`: `√2 sech(x - a)`.
pub fn soliton_upper(kappa: f64, x: f64) -> f64 {
    let a = (2f64.sqrt() / kappa).acosh();
    2f64.sqrt() / (x - a).cosh()
}

/// Unit point mass, half line of length `extent` with `nodes` graded cells.
pub fn half_line_problem(extent: f64, nodes: usize, grading: f64, p: f64) -> Problem {
    let grid = Arc::new(build_grid(GridSpec::half_line(extent, nodes, grading)).unwrap());
    let kernel = Arc::new(assemble_green(grid.clone()).unwrap());
    let trace = poisson_trace(grid, &MuSpec::PointMass { mass: 1.0 }).unwrap();
    Problem::new(kernel, trace, p).unwrap()
}

/// Brute-force stabilization index: the smallest `j` for which a scan of `D_*` near its
/// floor `β = -1 - 1/r` lies inside `D_j`, with the recursion written out from scratch.
pub fn stabilization_by_scan(n: usize, p: f64, q: f64, alpha: f64, r0: f64, beta0: f64) -> usize {
    let nf = n as f64;
    let delta = 2.0 - (p - 1.0) * (nf / q + alpha);
    let tau = if n == 1 {
        2.0 - (p - 1.0) / q
    } else {
        (2.0 / nf - (p - 1.0) / q).min(delta / (nf - 1.0))
    };
    let inside = |j: usize, inv: f64, beta: f64| -> bool {
        let jf = j as f64;
        let lo = 1.0 / r0 - jf * tau;
        let hi = 1.0 / r0 + jf * (p - 1.0) / q;
        let bj = (beta0 + nf * (1.0 / r0 - inv) - jf * delta).max(-1.0 - inv);
        lo < inv && inv < hi && beta > bj
    };
    let gap = 1e-7;
    let samples: Vec<f64> = (0..=400).map(|k| gap + (1.0 - 2.0 * gap) * k as f64 / 400.0).collect();
    (1..10_000)
        .find(|&j| samples.iter().all(|&inv| inside(j, inv, -1.0 - inv + gap)))
        .expect("scan terminates")
}
