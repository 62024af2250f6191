//! Truncated, graded grids on the half space and weighted `L^q_α` norms.
//!
//! `N = 1` uses the half line `(0, H)`. For `N = 2, 3` the grid is axisymmetric: a node
//! stands for the whole orbit of `(ρ, x_N)` under rotations of the lateral variable
//! (the two mirror points `±ρ` for `N = 2`, a ring of radius `ρ` for `N = 3`), so only
//! radial boundary data can be represented. Quadrature weights carry the orbit measure,
//! i.e. `2·Δρ·Δt` for `N = 2` and `2πρ·Δρ·Δt` for `N = 3`.
//!
//! Heights follow the graded edges `t_k = H (k/n)^g`, nodes sit at cell midpoints and
//! the quadrature is the midpoint rule.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{Dimension, HalfSpacePoint};

/// Cell extents of one node: `[ρ_lo, ρ_hi]` laterally (unused for `N = 1`) and
/// `[t_lo, t_hi]` in height.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub radial: [f64; 2],
    pub height: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dimension: Dimension,
    /// Lateral extent `R` (ignored for `N = 1`).
    pub lateral_extent: f64,
    /// Height extent `H`.
    pub height_extent: f64,
    pub nodes_lateral: usize,
    pub nodes_height: usize,
    pub grading: f64,
}

impl GridSpec {
    pub fn half_line(height_extent: f64, nodes_height: usize, grading: f64) -> Self {
        GridSpec {
            dimension: Dimension::One,
            lateral_extent: 0.0,
            height_extent,
            nodes_lateral: 1,
            nodes_height,
            grading,
        }
    }

    pub fn node_count(&self) -> usize {
        match self.dimension {
            Dimension::One => self.nodes_height,
            _ => self.nodes_lateral * self.nodes_height,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    spec: GridSpec,
    nodes: Vec<HalfSpacePoint>,
    quad_weights: Vec<f64>,
    cells: Vec<Cell>,
}

/// Orbit measure factor of a ring of radius `ρ` in the lateral variable.
pub(crate) fn orbit_factor(dim: Dimension, rho: f64) -> f64 {
    match dim {
        Dimension::One => 1.0,
        Dimension::Two => 2.0,
        Dimension::Three => 2.0 * std::f64::consts::PI * rho,
    }
}

/// Builds the tensor grid described by `spec`.
pub fn build_grid(spec: GridSpec) -> Result<Grid> {
    if !(spec.height_extent > 0.0 && spec.height_extent.is_finite()) {
        return Err(Error::Config(format!("height extent must be positive, got {}", spec.height_extent)));
    }
    if spec.nodes_height < 2 {
        return Err(Error::Config("at least 2 height nodes are required".into()));
    }
    if !(spec.grading >= 1.0 && spec.grading.is_finite()) {
        return Err(Error::Config(format!("grading must be >= 1, got {}", spec.grading)));
    }
    if spec.dimension != Dimension::One {
        if !(spec.lateral_extent > 0.0 && spec.lateral_extent.is_finite()) {
            return Err(Error::Config(format!(
                "lateral extent must be positive, got {}",
                spec.lateral_extent
            )));
        }
        if spec.nodes_lateral < 2 {
            return Err(Error::Config("at least 2 lateral nodes are required".into()));
        }
    }

    let nh = spec.nodes_height;
    let edges: Vec<f64> = (0..=nh)
        .map(|k| spec.height_extent * (k as f64 / nh as f64).powf(spec.grading))
        .collect();

    let radial_cells: Vec<[f64; 2]> = match spec.dimension {
        Dimension::One => vec![[0.0, 0.0]],
        _ => {
            let nl = spec.nodes_lateral;
            let dr = spec.lateral_extent / nl as f64;
            (0..nl).map(|i| [i as f64 * dr, (i + 1) as f64 * dr]).collect()
        }
    };

    let count = spec.node_count();
    let mut nodes = Vec::with_capacity(count);
    let mut quad_weights = Vec::with_capacity(count);
    let mut cells = Vec::with_capacity(count);
    for radial in &radial_cells {
        let rho = 0.5 * (radial[0] + radial[1]);
        let lateral_width = match spec.dimension {
            Dimension::One => 1.0,
            _ => radial[1] - radial[0],
        };
        for k in 0..nh {
            let height = [edges[k], edges[k + 1]];
            let t = 0.5 * (height[0] + height[1]);
            nodes.push(HalfSpacePoint::new([rho, 0.0], t));
            quad_weights.push(orbit_factor(spec.dimension, rho) * lateral_width * (height[1] - height[0]));
            cells.push(Cell {
                radial: *radial,
                height,
            });
        }
    }

    Ok(Grid {
        spec,
        nodes,
        quad_weights,
        cells,
    })
}

impl Grid {
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn dimension(&self) -> Dimension {
        self.spec.dimension
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[HalfSpacePoint] {
        &self.nodes
    }

    pub fn quad_weights(&self) -> &[f64] {
        &self.quad_weights
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn heights(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.iter().map(|p| p.height)
    }

    /// Exact volume of the truncated domain.
    pub fn domain_volume(&self) -> f64 {
        let h = self.spec.height_extent;
        let r = self.spec.lateral_extent;
        match self.spec.dimension {
            Dimension::One => h,
            Dimension::Two => 2.0 * r * h,
            Dimension::Three => std::f64::consts::PI * r * r * h,
        }
    }
}

/// `h(t) = min(t, 1)` for `t > 0`.
#[inline]
pub fn weight_h(t: f64) -> f64 {
    if t < 1.0 {
        t
    } else {
        1.0
    }
}

/// Real values on the nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape {
                expected: grid.len(),
                found: values.len(),
            });
        }
        Ok(Field { grid, values })
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.len();
        Field {
            grid,
            values: vec![0.0; n],
        }
    }

    pub fn constant(grid: Arc<Grid>, c: f64) -> Self {
        let n = grid.len();
        Field {
            grid,
            values: vec![c; n],
        }
    }

    pub fn from_fn<F: FnMut(&HalfSpacePoint) -> f64>(grid: Arc<Grid>, f: F) -> Self {
        let values = grid.nodes().iter().map(f).collect();
        Field { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Same grid (by identity or by value).
    pub fn shares_grid(&self, other: &Field) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    pub fn with_values(&self, values: Vec<f64>) -> Result<Field> {
        Field::new(self.grid.clone(), values)
    }

    pub fn map<F: FnMut(f64) -> f64>(&self, f: F) -> Field {
        Field {
            grid: self.grid.clone(),
            values: self.values.iter().copied().map(f).collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> Field {
        self.map(|v| c * v)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `sup |self - other|`.
    pub fn sup_distance(&self, other: &Field) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Midpoint-rule approximation of `‖f‖_{L^q_α} = (∫ |f|^q h(x_N)^{qα} dx)^{1/q}` on the
/// truncated domain.
pub fn weighted_norm(f: &Field, q: f64, alpha: f64) -> f64 {
    assert!(q >= 1.0, "q must be at least 1");
    let grid = f.grid();
    let sum: f64 = f
        .values()
        .iter()
        .zip(grid.quad_weights())
        .zip(grid.nodes())
        .map(|((v, w), x)| w * v.abs().powf(q) * weight_h(x.height).powf(q * alpha))
        .sum();
    sum.powf(1.0 / q)
}
