//! Discretized integral operators on a [`Grid`]: the Nyström matrix of `G[·]`, the
//! boundary term `P[μ]`, and the linearization `h ↦ G[p u^{p-1} h]`.
//!
//! Entry `(i, j)` of the kernel matrix is `G(x_i, x_j) w_j`. For axisymmetric grids the
//! kernel is averaged over the orbit of `x_j` (mirror pair for `N = 2`, ring for `N = 3`
//! with a 32-point Gauss rule in the angle). The diagonal uses the average of the
//! kernel over a 4-point subdivision of the node's own cell.
//!
//! With `W = diag(w)` and `A = diag(a)`, `K A` is self-adjoint for the inner product
//! `⟨x, y⟩ = Σ w_i a_i x_i y_i`; the power iteration uses this for its Rayleigh quotient.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVectorView, DVectorViewMut};
use serde::{Deserialize, Serialize};

use crate::discretization::{orbit_factor, Cell, Field, Grid};
use crate::error::{Error, Result};
use crate::kernels::{green_from_distances, pair_geometry, poisson_from_distance, Dimension, HalfSpacePoint};
use crate::special::{breaks_around, GaussRule};

/// Largest grid for which a dense kernel matrix is assembled.
pub const MAX_DENSE_NODES: usize = 20_000;

const RING_ORDER: usize = 32;

/// Dense Nyström matrix of `G[·]` with quadrature weights folded in.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    grid: Arc<Grid>,
    matrix: DMatrix<f64>,
}

impl KernelMatrix {
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn len(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.nrows() == 0
    }

    /// `y = K x` on raw slices.
    pub fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        let n = self.len();
        let xv = DVectorView::from_slice(x, n);
        let mut yv = DVectorViewMut::from_slice(y, n);
        yv.gemv(1.0, &self.matrix, &xv, 0.0);
    }

    /// `y = Kᵀ x` on raw slices.
    pub fn apply_transpose_into(&self, x: &[f64], y: &mut [f64]) {
        let n = self.len();
        let xv = DVectorView::from_slice(x, n);
        let mut yv = DVectorViewMut::from_slice(y, n);
        yv.gemv_tr(1.0, &self.matrix, &xv, 0.0);
    }

    pub fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        self.apply_into(x, &mut y);
        y
    }
}

/// Orbit-averaged kernel between a node and an arbitrary axisymmetric point.
struct OrbitKernel {
    dim: Dimension,
    ring: Vec<(f64, f64)>,
}

impl OrbitKernel {
    fn new(dim: Dimension) -> Self {
        let ring = if dim == Dimension::Three {
            let rule = GaussRule::new(RING_ORDER);
            rule.mapped(0.0, PI).map(|(phi, w)| (phi.cos(), w / PI)).collect()
        } else {
            Vec::new()
        };
        OrbitKernel { dim, ring }
    }

    #[inline]
    fn pair(&self, lateral_sq: f64, t: f64, s: f64) -> f64 {
        let (r, r_star, delta) = pair_geometry(lateral_sq, t, s);
        green_from_distances(self.dim, r, r_star, delta)
    }

    /// Average of `G(x, ·)` over the orbit of the point `(ρ_y, s)`.
    fn eval(&self, rho_x: f64, t: f64, rho_y: f64, s: f64) -> f64 {
        match self.dim {
            Dimension::One => self.pair(0.0, t, s),
            Dimension::Two => {
                0.5 * (self.pair((rho_x - rho_y).powi(2), t, s) + self.pair((rho_x + rho_y).powi(2), t, s))
            }
            Dimension::Three => {
                let base = rho_x * rho_x + rho_y * rho_y;
                let cross = 2.0 * rho_x * rho_y;
                self.ring
                    .iter()
                    .map(|&(c, w)| w * self.pair((base - cross * c).max(0.0), t, s))
                    .sum()
            }
        }
    }

    /// Cell average for the diagonal entry: 4 subcell points with their own weights.
    fn diagonal(&self, node: &HalfSpacePoint, cell: &Cell) -> f64 {
        let [t0, t1] = cell.height;
        match self.dim {
            Dimension::One => {
                let dt = (t1 - t0) / 4.0;
                (0..4)
                    .map(|k| self.eval(0.0, node.height, 0.0, t0 + (k as f64 + 0.5) * dt) * dt)
                    .sum()
            }
            _ => {
                let [r0, r1] = cell.radial;
                let dr = 0.5 * (r1 - r0);
                let dt = 0.5 * (t1 - t0);
                let mut total = 0.0;
                for a in 0..2 {
                    let rho = r0 + (a as f64 + 0.5) * dr;
                    for b in 0..2 {
                        let s = t0 + (b as f64 + 0.5) * dt;
                        let w = orbit_factor(self.dim, rho) * dr * dt;
                        total += w * self.eval(node.lateral[0], node.height, rho, s);
                    }
                }
                total
            }
        }
    }
}

/// Assembles the Nyström matrix of `G[·]` on `grid`.
pub fn assemble_green(grid: Arc<Grid>) -> Result<KernelMatrix> {
    let n = grid.len();
    if n > MAX_DENSE_NODES {
        return Err(Error::TooLarge {
            nodes: n,
            limit: MAX_DENSE_NODES,
        });
    }
    let kernel = OrbitKernel::new(grid.dimension());
    let nodes = grid.nodes();
    let w = grid.quad_weights();
    let mut matrix = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let y = &nodes[j];
        for i in 0..j {
            let x = &nodes[i];
            let g = kernel.eval(x.lateral[0], x.height, y.lateral[0], y.height);
            matrix[(i, j)] = g * w[j];
            matrix[(j, i)] = g * w[i];
        }
        matrix[(j, j)] = kernel.diagonal(y, &grid.cells()[j]);
    }
    Ok(KernelMatrix { grid, matrix })
}

/// `G[f]` at the grid nodes.
pub fn apply_green(k: &KernelMatrix, f: &Field) -> Result<Field> {
    if !(Arc::ptr_eq(f.grid(), &k.grid) || **f.grid() == *k.grid) {
        return Err(Error::Shape {
            expected: k.len(),
            found: f.len(),
        });
    }
    Field::new(k.grid.clone(), k.apply_vec(f.values()))
}

/// Boundary measure `μ`. For `N ≥ 2` point masses sit at the origin and densities are
/// radial, given by samples `values[k]` at `radii[k]`, linear in between and zero
/// beyond the last radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MuSpec {
    PointMass { mass: f64 },
    RadialDensity { radii: Vec<f64>, values: Vec<f64> },
}

impl MuSpec {
    pub fn validate(&self, dim: Dimension) -> Result<()> {
        match self {
            MuSpec::PointMass { mass } => {
                if !(*mass > 0.0 && mass.is_finite()) {
                    return Err(Error::Config(format!("point mass must be positive, got {mass}")));
                }
            }
            MuSpec::RadialDensity { radii, values } => {
                if dim == Dimension::One {
                    return Err(Error::Config(
                        "the boundary of the half line is a point; use a point mass".into(),
                    ));
                }
                if radii.len() < 2 || radii.len() != values.len() {
                    return Err(Error::Config(
                        "density needs at least two samples and matching radii/values".into(),
                    ));
                }
                if radii[0] < 0.0 || radii.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Config("density radii must be nonnegative and increasing".into()));
                }
                if values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
                    return Err(Error::Config("density values must be nonnegative".into()));
                }
                if values.iter().all(|v| *v == 0.0) {
                    return Err(Error::Config("density is identically zero".into()));
                }
            }
        }
        Ok(())
    }
}

/// `∫ P(x, z) g(|z|) dz` for a radial density `g` on the boundary.
pub fn poisson_of_radial_density(dim: Dimension, x: &HalfSpacePoint, radii: &[f64], values: &[f64]) -> f64 {
    let rule = GaussRule::new(10);
    let t = x.height;
    let rho_x = x.lateral[0].hypot(x.lateral[1]);
    let lo = radii[0];
    let hi = *radii.last().unwrap();
    let density = |s: f64| -> f64 {
        let k = radii.partition_point(|&r| r <= s).clamp(1, radii.len() - 1);
        let (r0, r1) = (radii[k - 1], radii[k]);
        let lam = ((s - r0) / (r1 - r0)).clamp(0.0, 1.0);
        values[k - 1] + lam * (values[k] - values[k - 1])
    };
    let mut breaks = breaks_around(lo, hi, rho_x, 0.25 * t, 0.5);
    breaks.extend_from_slice(radii);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    match dim {
        Dimension::One => 0.0,
        Dimension::Two => rule.integrate_panels(&breaks, |s| {
            let near = ((rho_x - s).powi(2) + t * t).sqrt();
            let far = ((rho_x + s).powi(2) + t * t).sqrt();
            density(s) * (poisson_from_distance(dim, t, near) + poisson_from_distance(dim, t, far))
        }),
        Dimension::Three => rule.integrate_panels(&breaks, |s| {
            let base = rho_x * rho_x + s * s + t * t;
            let cross = 2.0 * rho_x * s;
            let width = ((rho_x - s).powi(2) + t * t).sqrt() / (rho_x * s).sqrt().max(1e-300);
            let angular = breaks_around(0.0, PI, 0.0, 0.25 * width.min(1.0), 0.5);
            let ring = rule.integrate_panels(&angular, |phi| {
                let rho = (base - cross * phi.cos()).max(t * t).sqrt();
                poisson_from_distance(dim, t, rho)
            });
            density(s) * s * 2.0 * ring
        }),
    }
}

/// `P[μ]` at the grid nodes.
pub fn poisson_trace(grid: Arc<Grid>, mu: &MuSpec) -> Result<Field> {
    let dim = grid.dimension();
    mu.validate(dim)?;
    let values: Vec<f64> = match mu {
        MuSpec::PointMass { mass } => grid
            .nodes()
            .iter()
            .map(|x| {
                let rho = (x.lateral[0].powi(2) + x.height * x.height).sqrt();
                mass * poisson_from_distance(dim, x.height, rho)
            })
            .collect(),
        MuSpec::RadialDensity { radii, values } => grid
            .nodes()
            .iter()
            .map(|x| poisson_of_radial_density(dim, x, radii, values))
            .collect(),
    };
    Field::new(grid, values)
}

/// `a = p u_+^{p-1}` at the nodes.
pub fn linearization_weight(u: &[f64], p: f64) -> Vec<f64> {
    u.iter().map(|&v| if v > 0.0 { p * v.powf(p - 1.0) } else { 0.0 }).collect()
}

/// First eigenpair of `ψ = ρ G[p u^{p-1} ψ]`.
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub rho: f64,
    /// `1/ρ`.
    pub lambda: f64,
    /// Nonnegative, unit sup norm.
    pub eigenfield: Field,
    pub iterations: usize,
    /// `‖Mψ - ρψ‖_∞` for the returned `ψ`.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct SpectrumOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            tolerance: 1e-8,
            max_iterations: 20_000,
        }
    }
}

pub fn linearized_spectrum(k: &KernelMatrix, u: &Field, p: f64) -> Result<EigenResult> {
    linearized_spectrum_with(k, u, p, SpectrumOptions::default())
}

/// Power iteration on `h ↦ K (a ∘ h)` from the constant field.
pub fn linearized_spectrum_with(k: &KernelMatrix, u: &Field, p: f64, opts: SpectrumOptions) -> Result<EigenResult> {
    if u.len() != k.len() {
        return Err(Error::Shape {
            expected: k.len(),
            found: u.len(),
        });
    }
    let a = linearization_weight(u.values(), p);
    if a.iter().all(|&v| v == 0.0) {
        return Err(Error::Precondition("linearized operator vanishes (u ≤ 0)".into()));
    }
    let w = k.grid().quad_weights();
    let n = k.len();
    let mut psi = vec![1.0; n];
    let mut scratch = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for it in 1..=opts.max_iterations {
        for i in 0..n {
            scratch[i] = a[i] * psi[i];
        }
        k.apply_into(&scratch, &mut y);
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..n {
            let m = w[i] * a[i] * psi[i];
            num += m * y[i];
            den += m * psi[i];
        }
        let rho = num / den;
        residual = psi.iter().zip(&y).fold(0.0, |m, (s, v)| m.max((v - rho * s).abs()));
        if residual <= opts.tolerance {
            return Ok(EigenResult {
                rho,
                lambda: 1.0 / rho,
                eigenfield: Field::new(k.grid().clone(), psi)?,
                iterations: it,
                residual,
            });
        }
        let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 || !rho.is_finite() {
            break;
        }
        for i in 0..n {
            psi[i] = y[i] / scale;
        }
    }
    Err(Error::IterationLimit {
        iterations: opts.max_iterations,
        residual,
    })
}

/// Discrete stability form `‖ω‖²_H - ∫ p u^{p-1} ω²` for `ω = G[g]`, using
/// `‖G[g]‖²_H = ⟨g, G[g]⟩`.
pub fn stability_form(k: &KernelMatrix, u: &Field, p: f64, g: &[f64]) -> f64 {
    let w = k.grid().quad_weights();
    let a = linearization_weight(u.values(), p);
    let omega = k.apply_vec(g);
    (0..k.len())
        .map(|i| w[i] * (g[i] * omega[i] - a[i] * omega[i] * omega[i]))
        .sum()
}

/// Singular values (descending) of `T_a h = G[a h]` as an operator on the discrete
/// `L²` space of the grid. Dense SVD, meant for small grids.
pub fn transfer_singular_values(k: &KernelMatrix, a: &[f64]) -> Result<Vec<f64>> {
    let n = k.len();
    if a.len() != n {
        return Err(Error::Shape {
            expected: n,
            found: a.len(),
        });
    }
    if n > 4000 {
        return Err(Error::TooLarge { nodes: n, limit: 4000 });
    }
    let sw: Vec<f64> = k.grid().quad_weights().iter().map(|v| v.sqrt()).collect();
    let m = DMatrix::from_fn(n, n, |i, j| sw[i] * k.matrix()[(i, j)] * a[j] / sw[j]);
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    Ok(sv)
}
