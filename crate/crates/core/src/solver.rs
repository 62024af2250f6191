//! Fixed-point machinery for `u = κP[μ] + G[u_+^p]`: the map `Ψ`, the monotone
//! iteration for the minimal solution, Newton refinement of `Φ = 0`, and bisection for
//! the threshold `κ*`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::discretization::{Field, Grid};
use crate::error::{Error, Result};
use crate::linalg::{gmres, lanczos, GmresOptions};
use crate::operators::{linearization_weight, KernelMatrix};

/// Kernel matrix, boundary term `P[μ]` and exponent `p` of one problem instance.
#[derive(Debug, Clone)]
pub struct Problem {
    kernel: Arc<KernelMatrix>,
    trace: Field,
    p: f64,
}

impl Problem {
    pub fn new(kernel: Arc<KernelMatrix>, trace: Field, p: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::Config(format!("p must exceed 1, got {p}")));
        }
        if trace.len() != kernel.len() {
            return Err(Error::Shape {
                expected: kernel.len(),
                found: trace.len(),
            });
        }
        Ok(Problem { kernel, trace, p })
    }

    pub fn kernel(&self) -> &KernelMatrix {
        &self.kernel
    }

    pub fn shared_kernel(&self) -> &Arc<KernelMatrix> {
        &self.kernel
    }

    pub fn trace(&self) -> &Field {
        &self.trace
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.kernel.grid()
    }

    pub fn len(&self) -> usize {
        self.kernel.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kernel.is_empty()
    }

    /// Same kernel, boundary measure multiplied by `factor`.
    pub fn with_scaled_measure(&self, factor: f64) -> Problem {
        Problem {
            kernel: self.kernel.clone(),
            trace: self.trace.scaled(factor),
            p: self.p,
        }
    }

    fn check(&self, v: &Field) -> Result<()> {
        if v.len() != self.len() {
            return Err(Error::Shape {
                expected: self.len(),
                found: v.len(),
            });
        }
        Ok(())
    }

    fn psi_raw(&self, v: &[f64], kappa: f64, out: &mut [f64]) {
        let p = self.p;
        let powered: Vec<f64> = v.iter().map(|&x| if x > 0.0 { x.powf(p) } else { 0.0 }).collect();
        self.kernel.apply_into(&powered, out);
        for (o, t) in out.iter_mut().zip(self.trace.values()) {
            *o += kappa * t;
        }
    }

    fn residual_raw(&self, u: &[f64], kappa: f64) -> Vec<f64> {
        let mut psi = vec![0.0; u.len()];
        self.psi_raw(u, kappa, &mut psi);
        u.iter().zip(&psi).map(|(a, b)| a - b).collect()
    }
}

/// `Ψ(v, κ) = κP[μ] + G[v_+^p]`.
pub fn psi_map(problem: &Problem, v: &Field, kappa: f64) -> Result<Field> {
    problem.check(v)?;
    let mut out = vec![0.0; v.len()];
    problem.psi_raw(v.values(), kappa, &mut out);
    v.with_values(out)
}

/// `Φ(u, κ) = u - Ψ(u, κ)`.
pub fn residual(problem: &Problem, u: &Field, kappa: f64) -> Result<Field> {
    problem.check(u)?;
    u.with_values(problem.residual_raw(u.values(), kappa))
}

pub fn residual_sup(problem: &Problem, u: &Field, kappa: f64) -> Result<f64> {
    Ok(residual(problem, u, kappa)?.sup_norm())
}

/// Starting field of the monotone iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartRule {
    /// `U_0 = κP[μ]`, a subsolution for every `κ`.
    #[default]
    ScaledTrace,
    /// `U_0 = P[μ]`.
    Trace,
    /// `U_0 = 0`.
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    Diverged,
    IterationLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationOptions {
    /// Stop when `sup|U_{j+1} - U_j| < tolerance · sup|U_{j+1}|`.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub blowup_cap: f64,
    /// Consecutive growing increments that count as divergence.
    pub growth_window: usize,
    pub start: StartRule,
    /// Number of leading iterates `U_0, U_1, …` to keep.
    pub record_iterates: usize,
}

impl Default for IterationOptions {
    fn default() -> Self {
        IterationOptions {
            tolerance: 1e-8,
            max_iterations: 100_000,
            blowup_cap: 1e6,
            growth_window: 20,
            start: StartRule::ScaledTrace,
            record_iterates: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// The limit when converged.
    pub solution: Option<Field>,
    pub iterations: usize,
    /// `sup|Φ(U, κ)|` at the last iterate (infinite after blow-up).
    pub residual_sup: f64,
    /// `sup|U_{j+1} - U_j|` for every step.
    pub increments: Vec<f64>,
    pub iterates: Vec<Field>,
}

impl SolveResult {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

/// Monotone iteration `U_{j+1} = κP[μ] + G[U_j^p]`.
pub fn monotone_iterate(problem: &Problem, kappa: f64, opts: &IterationOptions) -> Result<SolveResult> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::Domain(format!("κ must be positive, got {kappa}")));
    }
    let start = match opts.start {
        StartRule::ScaledTrace => problem.trace.values().iter().map(|t| kappa * t).collect(),
        StartRule::Trace => problem.trace.values().to_vec(),
        StartRule::Zero => vec![0.0; problem.len()],
    };
    iterate_from(problem, kappa, start, opts)
}

/// Monotone iteration from an explicit starting field.
pub fn monotone_iterate_from(problem: &Problem, kappa: f64, start: &Field, opts: &IterationOptions) -> Result<SolveResult> {
    problem.check(start)?;
    iterate_from(problem, kappa, start.values().to_vec(), opts)
}

fn iterate_from(problem: &Problem, kappa: f64, mut current: Vec<f64>, opts: &IterationOptions) -> Result<SolveResult> {
    let grid = problem.grid().clone();
    let mut next = vec![0.0; current.len()];
    let mut increments = Vec::new();
    let mut iterates = Vec::new();
    if opts.record_iterates > 0 {
        iterates.push(Field::new(grid.clone(), current.clone())?);
    }
    let mut growing = 0usize;
    let mut status = SolveStatus::IterationLimit;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        problem.psi_raw(&current, kappa, &mut next);
        iterations += 1;
        let mut inc = 0.0f64;
        let mut size = 0.0f64;
        for (a, b) in next.iter().zip(&current) {
            inc = inc.max((a - b).abs());
            size = size.max(a.abs());
        }
        if let Some(&prev) = increments.last() {
            if inc > prev {
                growing += 1;
            } else {
                growing = 0;
            }
        }
        increments.push(inc);
        std::mem::swap(&mut current, &mut next);
        if iterates.len() < opts.record_iterates {
            iterates.push(Field::new(grid.clone(), current.clone())?);
        }
        if !size.is_finite() || size > opts.blowup_cap || growing >= opts.growth_window {
            status = SolveStatus::Diverged;
            break;
        }
        if inc < opts.tolerance * size {
            status = SolveStatus::Converged;
            break;
        }
    }
    let residual_sup = if status == SolveStatus::Diverged {
        f64::INFINITY
    } else {
        problem
            .residual_raw(&current, kappa)
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    };
    let solution = if status == SolveStatus::Converged {
        Some(Field::new(grid, current)?)
    } else {
        None
    };
    Ok(SolveResult {
        status,
        solution,
        iterations,
        residual_sup,
        increments,
        iterates,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    /// Target for `sup|Φ|`.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub gmres: GmresOptions,
    /// A Newton step longer than this multiple of the residual marks a singular Jacobian.
    pub singular_ratio: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tolerance: 1e-10,
            max_iterations: 12,
            gmres: GmresOptions::default(),
            singular_ratio: 1e8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub solution: Field,
    pub iterations: usize,
    /// `sup|Φ|` before each step and after the last one.
    pub residual_history: Vec<f64>,
}

impl NewtonOutcome {
    pub fn residual_sup(&self) -> f64 {
        *self.residual_history.last().unwrap()
    }
}

/// Applies `J = I - K diag(a)`.
pub(crate) fn jacobian_apply(kernel: &KernelMatrix, a: &[f64], x: &[f64], y: &mut [f64]) {
    let scaled: Vec<f64> = x.iter().zip(a).map(|(v, w)| v * w).collect();
    kernel.apply_into(&scaled, y);
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi = xi - *yi;
    }
}

/// Newton iteration on `Φ(u, κ) = 0` with GMRES inner solves.
pub fn newton_refine(problem: &Problem, u0: &Field, kappa: f64, opts: &NewtonOptions) -> Result<NewtonOutcome> {
    problem.check(u0)?;
    let mut u = u0.values().to_vec();
    let mut r = problem.residual_raw(&u, kappa);
    let mut norm = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut history = vec![norm];
    let mut iterations = 0;
    while norm > opts.tolerance {
        if iterations >= opts.max_iterations {
            return Err(Error::NearFold);
        }
        let a = linearization_weight(&u, problem.p);
        let out = gmres(|x, y| jacobian_apply(&problem.kernel, &a, x, y), &r, opts.gmres);
        if !out.converged {
            return Err(Error::NearFold);
        }
        let step = out.solution.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if step > opts.singular_ratio * norm.max(f64::MIN_POSITIVE) {
            return Err(Error::NearFold);
        }
        for (ui, di) in u.iter_mut().zip(&out.solution) {
            *ui -= di;
        }
        r = problem.residual_raw(&u, kappa);
        let new_norm = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        iterations += 1;
        history.push(new_norm);
        if !new_norm.is_finite() || (iterations >= 3 && new_norm > norm) {
            return Err(Error::NearFold);
        }
        norm = new_norm;
    }
    Ok(NewtonOutcome {
        solution: u0.with_values(u)?,
        iterations,
        residual_history: history,
    })
}

/// Bracket `[lower, upper]` around `κ*`: converged at `lower`, diverged at `upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaStarEstimate {
    pub lower: f64,
    pub upper: f64,
    pub width: f64,
    pub probes: usize,
}

impl KappaStarEstimate {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn contains(&self, kappa: f64) -> bool {
        self.lower <= kappa && kappa <= self.upper
    }
}

/// Bisection on the convergence/divergence dichotomy of the monotone iteration.
///
/// A probe that hits the iteration limit is undetermined; the bracket is then shrunk
/// from both ends by a quarter of its width instead.
pub fn estimate_kappa_star(
    problem: &Problem,
    bracket: (f64, f64),
    tolerance: f64,
    opts: &IterationOptions,
) -> Result<KappaStarEstimate> {
    let (mut lower, mut upper) = bracket;
    if !(lower > 0.0 && upper > lower && upper.is_finite()) {
        return Err(Error::Bracket(format!("need 0 < lo < hi, got ({lower}, {upper})")));
    }
    if !(tolerance > 0.0) {
        return Err(Error::Bracket("tolerance must be positive".into()));
    }
    let classify = |kappa: f64| monotone_iterate(problem, kappa, opts).map(|r| r.status);
    if classify(lower)? != SolveStatus::Converged {
        return Err(Error::Bracket(format!("iteration does not converge at lower end {lower}")));
    }
    if classify(upper)? != SolveStatus::Diverged {
        return Err(Error::Bracket(format!("iteration does not diverge at upper end {upper}")));
    }
    let mut probes = 2;
    while upper - lower > tolerance {
        let width = upper - lower;
        let mid = 0.5 * (lower + upper);
        probes += 1;
        match classify(mid)? {
            SolveStatus::Converged => lower = mid,
            SolveStatus::Diverged => upper = mid,
            SolveStatus::IterationLimit => {
                let mut moved = false;
                let lo_probe = lower + 0.25 * width;
                probes += 1;
                match classify(lo_probe)? {
                    SolveStatus::Converged => {
                        lower = lo_probe;
                        moved = true;
                    }
                    SolveStatus::Diverged => {
                        upper = lo_probe;
                        moved = true;
                    }
                    SolveStatus::IterationLimit => {}
                }
                let hi_probe = upper - 0.25 * width;
                if hi_probe > lower {
                    probes += 1;
                    match classify(hi_probe)? {
                        SolveStatus::Diverged => {
                            upper = hi_probe;
                            moved = true;
                        }
                        SolveStatus::Converged => {
                            lower = hi_probe;
                            moved = true;
                        }
                        SolveStatus::IterationLimit => {}
                    }
                }
                if !moved {
                    return Err(Error::IterationLimit {
                        iterations: opts.max_iterations,
                        residual: width,
                    });
                }
            }
        }
    }
    Ok(KappaStarEstimate {
        lower,
        upper,
        width: upper - lower,
        probes,
    })
}

/// Smallest singular value of `Φ_u = I - K diag(p u_+^{p-1})` as an operator on the
/// discrete `L²` space of the grid (Lanczos on the normal operator).
pub fn jacobian_min_singular_value(problem: &Problem, u: &Field) -> Result<f64> {
    problem.check(u)?;
    let n = problem.len();
    let a = linearization_weight(u.values(), problem.p);
    let sw: Vec<f64> = problem.grid().quad_weights().iter().map(|w| w.sqrt()).collect();
    let k = &problem.kernel;
    // B = W^{1/2} J W^{-1/2},  Bᵀ = W^{-1/2} Jᵀ W^{1/2}
    let mut t1 = vec![0.0; n];
    let mut t2 = vec![0.0; n];
    let normal = |x: &[f64], y: &mut [f64]| {
        for i in 0..n {
            t1[i] = x[i] / sw[i];
        }
        jacobian_apply(k, &a, &t1, &mut t2);
        for i in 0..n {
            t1[i] = t2[i] * sw[i];
        }
        // Jᵀ v = v - A Kᵀ v
        for i in 0..n {
            t2[i] = t1[i] * sw[i];
        }
        k.apply_transpose_into(&t2, y);
        for i in 0..n {
            y[i] = (t2[i] - a[i] * y[i]) / sw[i];
        }
    };
    let res = lanczos(normal, n, 300, 1, true, 1e-13, 0x5eed);
    let smallest = res
        .ritz_values
        .first()
        .copied()
        .ok_or_else(|| Error::NotFound("no Ritz values".into()))?;
    Ok(smallest.max(0.0).sqrt())
}
