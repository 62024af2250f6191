//! Pseudo-arclength continuation of `Φ(u, κ) = 0` through the fold.
//!
//! Each step predicts along the unit tangent `t = (t_u, t_κ)` (normalized so that
//! `‖t_u‖_∞ + |t_κ| = 1`) and corrects with Newton on the bordered system
//!
//! ```text
//! Φ(u, κ) = 0,    θ ⟨t_u, u - u_pred⟩ + t_κ (κ - κ_pred) = 0,    θ = 1/n,
//! ```
//!
//! solved by GMRES in dimension `n + 1`. The bordered matrix stays invertible at the
//! fold, where `Φ_u` alone is singular. When `t_κ` changes sign between two accepted
//! points the fold is located by parabolic search for the maximum of `κ` along the
//! predictor line and inserted into the branch with `fold_flag` set.

use serde::{Deserialize, Serialize};

use crate::discretization::{weighted_norm, Field};
use crate::error::{Error, Result};
use crate::linalg::{gmres, GmresOptions};
use crate::operators::{linearization_weight, linearized_spectrum};
use crate::solver::{jacobian_apply, monotone_iterate, newton_refine, IterationOptions, NewtonOptions, Problem};

#[derive(Debug, Clone)]
pub struct BranchPoint {
    pub kappa: f64,
    pub field: Field,
    pub sup_norm: f64,
    pub lq_alpha_norm: f64,
    pub lambda: f64,
    /// Cumulative `Σ (‖Δu‖_∞ + |Δκ|)` from the first point.
    pub arclength: f64,
    pub fold_flag: bool,
}

#[derive(Debug, Clone, Default)]
pub struct Branch {
    pub points: Vec<BranchPoint>,
    pub fold_index: Option<usize>,
    /// Field part of the unit tangent at the fold.
    pub fold_tangent: Option<Field>,
}

impl Branch {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuationOptions {
    pub start_kappa: f64,
    /// Initial step in the `‖·‖_∞ + |·|` metric.
    pub step: f64,
    pub min_step: f64,
    pub max_step: f64,
    pub max_points: usize,
    /// Stop once the branch has turned and `κ` drops below this (default: `start_kappa`).
    pub stop_kappa: Option<f64>,
    /// Exponents of the recorded `L^q_α` norm.
    pub norm_q: f64,
    pub norm_alpha: f64,
    /// Target for `sup|Φ|` at every stored point.
    pub tolerance: f64,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        ContinuationOptions {
            start_kappa: 0.2,
            step: 0.05,
            min_step: 1e-5,
            max_step: 0.2,
            max_points: 400,
            stop_kappa: None,
            norm_q: 4.0,
            norm_alpha: 0.0,
            tolerance: 1e-10,
        }
    }
}

const MAX_CORRECTOR_STEPS: usize = 10;
const GROWTH_AFTER: usize = 3;
const GROWTH_FACTOR: f64 = 1.3;

#[derive(Clone)]
struct State {
    u: Vec<f64>,
    kappa: f64,
}

#[derive(Clone)]
struct Tangent {
    u: Vec<f64>,
    kappa: f64,
}

struct Tracer<'a> {
    problem: &'a Problem,
    theta: f64,
    gmres: GmresOptions,
    tolerance: f64,
}

impl<'a> Tracer<'a> {
    fn residual(&self, s: &State) -> Vec<f64> {
        let u = Field::new(self.problem.grid().clone(), s.u.clone()).expect("length checked");
        crate::solver::residual(self.problem, &u, s.kappa)
            .expect("length checked")
            .into_values()
    }

    /// Solves `[Φ_u, -P[μ]; θ bᵤᵀ, b_κ] z = rhs`.
    fn bordered_solve(&self, a: &[f64], border: &Tangent, rhs: &[f64]) -> Option<Vec<f64>> {
        let n = self.problem.len();
        let trace = self.problem.trace().values();
        let kernel = self.problem.kernel();
        let theta = self.theta;
        let apply = |x: &[f64], y: &mut [f64]| {
            jacobian_apply(kernel, a, &x[..n], &mut y[..n]);
            let dk = x[n];
            for i in 0..n {
                y[i] -= trace[i] * dk;
            }
            let dot: f64 = border.u.iter().zip(&x[..n]).map(|(b, v)| b * v).sum();
            y[n] = theta * dot + border.kappa * dk;
        };
        let out = gmres(apply, rhs, self.gmres);
        if out.converged {
            Some(out.solution)
        } else {
            None
        }
    }

    fn tangent_at(&self, s: &State, previous: &Tangent) -> Option<Tangent> {
        let n = self.problem.len();
        let a = linearization_weight(&s.u, self.problem.p());
        let mut rhs = vec![0.0; n + 1];
        rhs[n] = 1.0;
        let z = self.bordered_solve(&a, previous, &rhs)?;
        let scale = z[..n].iter().fold(0.0f64, |m, v| m.max(v.abs())) + z[n].abs();
        Some(Tangent {
            u: z[..n].iter().map(|v| v / scale).collect(),
            kappa: z[n] / scale,
        })
    }

    /// Newton on the bordered system with the hyperplane through `pred` normal to `t`.
    fn correct(&self, pred: &State, t: &Tangent, max_distance: f64) -> Option<State> {
        let n = self.problem.len();
        let mut s = pred.clone();
        for _ in 0..MAX_CORRECTOR_STEPS {
            let phi = self.residual(&s);
            let constraint = self.theta
                * t.u.iter().zip(s.u.iter().zip(&pred.u)).map(|(b, (x, y))| b * (x - y)).sum::<f64>()
                + t.kappa * (s.kappa - pred.kappa);
            let norm = phi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if !norm.is_finite() {
                return None;
            }
            if norm <= self.tolerance && constraint.abs() <= self.tolerance {
                let dist = s.u.iter().zip(&pred.u).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
                    + (s.kappa - pred.kappa).abs();
                return (dist <= max_distance && s.kappa > 0.0).then_some(s);
            }
            let a = linearization_weight(&s.u, self.problem.p());
            let mut rhs: Vec<f64> = phi;
            rhs.push(constraint);
            let delta = self.bordered_solve(&a, t, &rhs)?;
            for i in 0..n {
                s.u[i] -= delta[i];
            }
            s.kappa -= delta[n];
        }
        None
    }

    fn predict(&self, s: &State, t: &Tangent, h: f64) -> State {
        State {
            u: s.u.iter().zip(&t.u).map(|(x, d)| x + h * d).collect(),
            kappa: s.kappa + h * t.kappa,
        }
    }
}

fn sup_step(a: &State, b: &State) -> f64 {
    a.u.iter().zip(&b.u).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) + (a.kappa - b.kappa).abs()
}

fn make_point(problem: &Problem, s: &State, arclength: f64, opts: &ContinuationOptions, fold: bool) -> Result<BranchPoint> {
    let field = Field::new(problem.grid().clone(), s.u.clone())?;
    let eig = linearized_spectrum(problem.kernel(), &field, problem.p())?;
    Ok(BranchPoint {
        kappa: s.kappa,
        sup_norm: field.sup_norm(),
        lq_alpha_norm: weighted_norm(&field, opts.norm_q, opts.norm_alpha),
        lambda: eig.lambda,
        arclength,
        fold_flag: fold,
        field,
    })
}

/// Traces the solution curve from the minimal solution at `start_kappa` through the fold.
pub fn trace_branch(problem: &Problem, opts: &ContinuationOptions) -> Result<Branch> {
    let n = problem.len();
    if !(opts.step > 0.0 && opts.min_step > 0.0 && opts.min_step <= opts.max_step) {
        return Err(Error::Config("continuation steps must satisfy 0 < min_step ≤ max_step".into()));
    }
    let start = monotone_iterate(problem, opts.start_kappa, &IterationOptions::default())?;
    let Some(start_field) = start.solution else {
        return Err(Error::Precondition(format!(
            "no minimal solution at start κ = {}",
            opts.start_kappa
        )));
    };
    let newton = NewtonOptions {
        tolerance: opts.tolerance,
        ..NewtonOptions::default()
    };
    let polished = newton_refine(problem, &start_field, opts.start_kappa, &newton)?;
    let tracer = Tracer {
        problem,
        theta: 1.0 / n as f64,
        gmres: GmresOptions {
            tolerance: 1e-13,
            ..GmresOptions::default()
        },
        tolerance: opts.tolerance,
    };
    let stop_kappa = opts.stop_kappa.unwrap_or(opts.start_kappa);

    let mut state = State {
        u: polished.solution.into_values(),
        kappa: opts.start_kappa,
    };
    // κ-direction as the initial border gives the natural-parameter tangent
    let axis = Tangent {
        u: vec![0.0; n],
        kappa: 1.0,
    };
    let mut tangent = tracer.tangent_at(&state, &axis).ok_or(Error::NearFold)?;

    let mut branch = Branch::default();
    let mut arclength = 0.0;
    branch.points.push(make_point(problem, &state, 0.0, opts, false)?);
    let mut h = opts.step.clamp(opts.min_step, opts.max_step);
    let mut successes = 0usize;
    let mut turned = false;

    while branch.points.len() < opts.max_points {
        let pred = tracer.predict(&state, &tangent, h);
        let Some(next) = tracer.correct(&pred, &tangent, 2.0 * h) else {
            h *= 0.5;
            successes = 0;
            if h < opts.min_step {
                break;
            }
            continue;
        };
        let Some(next_tangent) = tracer.tangent_at(&next, &tangent) else {
            h *= 0.5;
            successes = 0;
            if h < opts.min_step {
                break;
            }
            continue;
        };

        if !turned && tangent.kappa > 0.0 && next_tangent.kappa <= 0.0 {
            let (fold_state, fold_tangent) = locate_fold(&tracer, &state, &tangent, &next, h)?;
            arclength += sup_step(&state, &fold_state);
            branch.points.push(make_point(problem, &fold_state, arclength, opts, true)?);
            branch.fold_index = Some(branch.points.len() - 1);
            branch.fold_tangent = Some(Field::new(problem.grid().clone(), fold_tangent.u)?);
            arclength += sup_step(&fold_state, &next);
            turned = true;
        } else {
            arclength += sup_step(&state, &next);
        }
        branch.points.push(make_point(problem, &next, arclength, opts, false)?);
        state = next;
        tangent = next_tangent;

        if turned && state.kappa < stop_kappa {
            break;
        }
        successes += 1;
        if successes >= GROWTH_AFTER {
            h = (h * GROWTH_FACTOR).min(opts.max_step);
            successes = 0;
        }
    }
    Ok(branch)
}

/// Maximizes `κ` along the predictor line from `from` by parabolic interpolation.
fn locate_fold(tracer: &Tracer, from: &State, t: &Tangent, to: &State, h: f64) -> Result<(State, Tangent)> {
    let point = |sigma: f64| -> Result<State> {
        if sigma == 0.0 {
            return Ok(from.clone());
        }
        let pred = tracer.predict(from, t, sigma);
        tracer.correct(&pred, t, 2.0 * h).ok_or(Error::NearFold)
    };
    let mut samples: Vec<(f64, State)> = vec![(0.0, from.clone()), (0.5 * h, point(0.5 * h)?), (h, to.clone())];
    let mut best_sigma = f64::NAN;
    for _ in 0..8 {
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (s0, k0) = (samples[0].0, samples[0].1.kappa);
        let (s1, k1) = (samples[1].0, samples[1].1.kappa);
        let (s2, k2) = (samples[2].0, samples[2].1.kappa);
        let num = (s1 - s0).powi(2) * (k1 - k2) - (s1 - s2).powi(2) * (k1 - k0);
        let den = (s1 - s0) * (k1 - k2) - (s1 - s2) * (k1 - k0);
        if den == 0.0 {
            break;
        }
        let sigma = (s1 - 0.5 * num / den).clamp(s0, s2);
        if (sigma - best_sigma).abs() <= 1e-10 * h {
            break;
        }
        best_sigma = sigma;
        let st = point(sigma)?;
        samples.push((sigma, st));
        // keep the three samples closest to the vertex
        samples.sort_by(|a, b| (a.0 - sigma).abs().total_cmp(&(b.0 - sigma).abs()));
        samples.truncate(3);
    }
    let best = samples
        .into_iter()
        .max_by(|a, b| a.1.kappa.total_cmp(&b.1.kappa))
        .map(|s| s.1)
        .expect("three samples");
    let tangent = tracer.tangent_at(&best, t).ok_or(Error::NearFold)?;
    Ok((best, tangent))
}

/// `κ` at the fold by quadratic interpolation of `κ(s)` around the local maximum,
/// together with the stored fold point.
pub fn detect_fold(branch: &Branch) -> Result<(f64, BranchPoint)> {
    let pts = &branch.points;
    let i = match branch.fold_index {
        Some(i) if i > 0 && i + 1 < pts.len() => i,
        _ => (1..pts.len().saturating_sub(1))
            .find(|&i| pts[i].kappa >= pts[i - 1].kappa && pts[i].kappa >= pts[i + 1].kappa)
            .ok_or_else(|| Error::NotFound("branch has no fold".into()))?,
    };
    let (s0, k0) = (pts[i - 1].arclength, pts[i - 1].kappa);
    let (s1, k1) = (pts[i].arclength, pts[i].kappa);
    let (s2, k2) = (pts[i + 1].arclength, pts[i + 1].kappa);
    // Lagrange parabola through the three points; value at its vertex
    let d01 = (k1 - k0) / (s1 - s0);
    let d12 = (k2 - k1) / (s2 - s1);
    let c2 = (d12 - d01) / (s2 - s0);
    let kappa_fold = if c2 < 0.0 {
        let vertex = 0.5 * (s0 + s1) - d01 / (2.0 * c2);
        let vertex = vertex.clamp(s0, s2);
        k0 + d01 * (vertex - s0) + c2 * (vertex - s0) * (vertex - s1)
    } else {
        k1
    };
    Ok((kappa_fold.max(k1), pts[i].clone()))
}

/// Every solution on `branch` at the given `κ`, refined by Newton from the
/// neighbouring branch points. Empty when `κ` exceeds every point of the branch.
pub fn solutions_at_kappa(problem: &Problem, branch: &Branch, kappa: f64) -> Result<Vec<Field>> {
    let newton = NewtonOptions::default();
    let mut found: Vec<Field> = Vec::new();
    for pair in branch.points.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if (a.kappa - kappa) * (b.kappa - kappa) > 0.0 || a.kappa == b.kappa {
            continue;
        }
        let lam = (kappa - a.kappa) / (b.kappa - a.kappa);
        let guess: Vec<f64> = a
            .field
            .values()
            .iter()
            .zip(b.field.values())
            .map(|(x, y)| x + lam * (y - x))
            .collect();
        let guess = a.field.with_values(guess)?;
        let refined = newton_refine(problem, &guess, kappa, &newton)?.solution;
        if found.iter().all(|f| f.sup_distance(&refined) > 1e-6) {
            found.push(refined);
        }
    }
    Ok(found)
}
