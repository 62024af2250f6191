//! Fundamental solution `E`, Dirichlet–Green kernel `G` and Poisson kernel `P` of
//! `-Δ + 1` on the half space `ℝ^N_+`, for `N ∈ {1, 2, 3}`.
//!
//! `E(r) = (2π)^{-N/2} r^{(2-N)/2} K_{(N-2)/2}(r)` reduces to elementary functions for
//! odd `N`:
//!
//! | N | `E(r)`            | `E'(r)`                     |
//! |---|-------------------|-----------------------------|
//! | 1 | `e^{-r}/2`        | `-e^{-r}/2`                 |
//! | 2 | `K_0(r)/(2π)`     | `-K_1(r)/(2π)`              |
//! | 3 | `e^{-r}/(4πr)`    | `-e^{-r}(1+r)/(4πr²)`       |
//!
//! `G(x, y) = E(|x-y|) - E(|x*-y|)` with `x*` the mirror image of `x`. Differentiating
//! `G(x, (z, s))` in `s` at `s = 0` gives the closed form of the Poisson kernel
//!
//! ```text
//! P(x, z) = 2 x_N |E'(ρ)| / ρ,   ρ = |(x' - z, x_N)|,
//! ```
//!
//! since `∂_s |x - (z,s)| = -(x_N - s)/|x-(z,s)|` and `∂_s |x* - (z,s)| = (x_N + s)/|x*-(z,s)|`
//! coincide up to sign at `s = 0`. For `N = 1` this is exactly `e^{-x}`.
//!
//! The difference `E(r) - E(r*)` is evaluated without cancellation through
//! `r* - r = 4 x_N y_N / (r + r*)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{bessel_k0, bessel_k01, bessel_k1, GaussRule};

/// Separations below this are treated as coincident.
pub const MIN_SEPARATION: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub enum Dimension {
    One,
    Two,
    Three,
}

impl Dimension {
    pub fn as_usize(self) -> usize {
        match self {
            Dimension::One => 1,
            Dimension::Two => 2,
            Dimension::Three => 3,
        }
    }
}

impl TryFrom<usize> for Dimension {
    type Error = Error;

    fn try_from(n: usize) -> Result<Self> {
        match n {
            1 => Ok(Dimension::One),
            2 => Ok(Dimension::Two),
            3 => Ok(Dimension::Three),
            other => Err(Error::UnsupportedDimension(other)),
        }
    }
}

impl From<Dimension> for usize {
    fn from(d: Dimension) -> usize {
        d.as_usize()
    }
}

/// A point `(x', x_N)` of the closed half space. Only the first `N - 1` lateral
/// coordinates are meaningful; the rest stay zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfSpacePoint {
    pub lateral: [f64; 2],
    pub height: f64,
}

impl HalfSpacePoint {
    pub fn new(lateral: [f64; 2], height: f64) -> Self {
        HalfSpacePoint { lateral, height }
    }

    /// A point on the vertical axis.
    pub fn on_axis(height: f64) -> Self {
        HalfSpacePoint {
            lateral: [0.0; 2],
            height,
        }
    }

    pub fn reflected(&self) -> Self {
        HalfSpacePoint {
            lateral: self.lateral,
            height: -self.height,
        }
    }

    fn lateral_distance_sq(&self, other: &HalfSpacePoint) -> f64 {
        let dx = self.lateral[0] - other.lateral[0];
        let dy = self.lateral[1] - other.lateral[1];
        dx * dx + dy * dy
    }

    pub fn distance(&self, other: &HalfSpacePoint) -> f64 {
        let dh = self.height - other.height;
        (self.lateral_distance_sq(other) + dh * dh).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    NearField,
    FarField,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelEval {
    pub value: f64,
    pub regime: Regime,
}

impl KernelEval {
    fn at(value: f64, r: f64) -> Self {
        KernelEval {
            value,
            regime: if r < 1.0 { Regime::NearField } else { Regime::FarField },
        }
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("radius must be positive and finite, got {r}")))
    }
}

/// `E(r)` without argument checks.
#[inline]
pub fn e_unchecked(dim: Dimension, r: f64) -> f64 {
    match dim {
        Dimension::One => 0.5 * (-r).exp(),
        Dimension::Two => bessel_k0(r) / (2.0 * PI),
        Dimension::Three => (-r).exp() / (4.0 * PI * r),
    }
}

/// `E'(r)` without argument checks.
#[inline]
pub fn de_unchecked(dim: Dimension, r: f64) -> f64 {
    match dim {
        Dimension::One => -0.5 * (-r).exp(),
        Dimension::Two => -bessel_k1(r) / (2.0 * PI),
        Dimension::Three => -(-r).exp() * (1.0 + r) / (4.0 * PI * r * r),
    }
}

pub fn fundamental_e(dim: Dimension, r: f64) -> Result<f64> {
    check_radius(r)?;
    Ok(e_unchecked(dim, r))
}

pub fn fundamental_de(dim: Dimension, r: f64) -> Result<f64> {
    check_radius(r)?;
    Ok(de_unchecked(dim, r))
}

thread_local! {
    static DIFFERENCE_RULE: GaussRule = GaussRule::new(10);
}

/// `E(r) - E(r*)` given `r`, `r*` and `δ = r* - r ≥ 0` computed in a cancellation-free way.
#[inline]
pub fn green_from_distances(dim: Dimension, r: f64, r_star: f64, delta: f64) -> f64 {
    match dim {
        Dimension::One => -0.5 * (-r).exp() * (-delta).exp_m1(),
        Dimension::Three => {
            let ratio_log = (-delta / r_star).ln_1p();
            -(-r).exp() / (4.0 * PI * r) * (ratio_log - delta).exp_m1()
        }
        Dimension::Two => {
            if delta < 0.5 * r {
                // K_0(r) - K_0(r*) = ∫_r^{r*} K_1(t) dt
                DIFFERENCE_RULE.with(|rule| rule.integrate(r, r_star, bessel_k1)) / (2.0 * PI)
            } else {
                (bessel_k0(r) - bessel_k0(r_star)) / (2.0 * PI)
            }
        }
    }
}

/// `(r, r*, δ)` for a pair of points given the squared lateral distance and heights.
#[inline]
pub fn pair_geometry(lateral_sq: f64, x_n: f64, y_n: f64) -> (f64, f64, f64) {
    let dh = x_n - y_n;
    let sh = x_n + y_n;
    let r = (lateral_sq + dh * dh).sqrt();
    let r_star = (lateral_sq + sh * sh).sqrt();
    let delta = 4.0 * x_n * y_n / (r + r_star);
    (r, r_star, delta)
}

fn check_interior(p: &HalfSpacePoint) -> Result<()> {
    if p.height > 0.0 && p.height.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("height must be positive, got {}", p.height)))
    }
}

/// Dirichlet–Green kernel `G(x, y)`.
pub fn green_g(dim: Dimension, x: &HalfSpacePoint, y: &HalfSpacePoint) -> Result<f64> {
    Ok(green_g_eval(dim, x, y)?.value)
}

pub fn green_g_eval(dim: Dimension, x: &HalfSpacePoint, y: &HalfSpacePoint) -> Result<KernelEval> {
    check_interior(x)?;
    check_interior(y)?;
    let lateral_sq = match dim {
        Dimension::One => 0.0,
        Dimension::Two => (x.lateral[0] - y.lateral[0]).powi(2),
        Dimension::Three => x.lateral_distance_sq(y),
    };
    let (r, r_star, delta) = pair_geometry(lateral_sq, x.height, y.height);
    if r < MIN_SEPARATION {
        return Err(Error::Singularity(r));
    }
    Ok(KernelEval::at(green_from_distances(dim, r, r_star, delta), r))
}

/// `P` as a function of the height `x_N` and the distance `ρ = |(x'-z, x_N)|`.
#[inline]
pub fn poisson_from_distance(dim: Dimension, x_n: f64, rho: f64) -> f64 {
    match dim {
        Dimension::One => (-x_n).exp(),
        Dimension::Two => x_n * bessel_k01(rho).1 / (PI * rho),
        Dimension::Three => x_n * (1.0 + rho) * (-rho).exp() / (2.0 * PI * rho * rho * rho),
    }
}

/// Poisson kernel `P(x, z)` for a boundary point `z ∈ ℝ^{N-1}` (ignored for `N = 1`).
pub fn poisson_p(dim: Dimension, x: &HalfSpacePoint, z: [f64; 2]) -> Result<f64> {
    check_interior(x)?;
    let lateral_sq = match dim {
        Dimension::One => 0.0,
        Dimension::Two => (x.lateral[0] - z[0]).powi(2),
        Dimension::Three => (x.lateral[0] - z[0]).powi(2) + (x.lateral[1] - z[1]).powi(2),
    };
    let rho = (lateral_sq + x.height * x.height).sqrt();
    Ok(poisson_from_distance(dim, x.height, rho))
}

#[cfg(test)]
mod tests {
    use super::*;

    const DIMS: [Dimension; 3] = [Dimension::One, Dimension::Two, Dimension::Three];

    #[test]
    fn closed_form_values() {
        let e1 = fundamental_e(Dimension::One, 0.5).unwrap();
        assert!((e1 - 0.303_265_3).abs() < 1e-7);
        let e3 = fundamental_e(Dimension::Three, 1.0).unwrap();
        assert!((e3 - (-1.0f64).exp() / (4.0 * PI)).abs() < 1e-16);
        let d1 = fundamental_de(Dimension::One, 1.0).unwrap();
        assert!((d1 + (-1.0f64).exp() / 2.0).abs() < 1e-16);
        let d3 = fundamental_de(Dimension::Three, 1.0).unwrap();
        assert!((d3 + (-1.0f64).exp() / (2.0 * PI)).abs() < 1e-16);
    }

    #[test]
    fn one_dimensional_e_solves_the_ode() {
        // -E'' + E = 0 away from 0; jump of E' across 0 is -1.
        let h = 1e-4;
        for &r in &[0.3, 1.0, 4.0] {
            let e = |t: f64| e_unchecked(Dimension::One, t);
            let second = (e(r + h) - 2.0 * e(r) + e(r - h)) / (h * h);
            assert!((-second + e(r)).abs() < 1e-6);
        }
        let jump = de_unchecked(Dimension::One, 1e-14) - (-de_unchecked(Dimension::One, 1e-14));
        assert!((jump + 1.0).abs() < 1e-12);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let h = 1e-5;
        for dim in DIMS {
            let mut r = 0.1;
            while r <= 10.0 {
                let fd = (e_unchecked(dim, r + h) - e_unchecked(dim, r - h)) / (2.0 * h);
                let exact = de_unchecked(dim, r);
                assert!((fd - exact).abs() <= 1e-6, "N={} r={r}", dim.as_usize());
                assert!(exact < 0.0);
                r += 0.1;
            }
        }
    }

    #[test]
    fn e_is_strictly_decreasing() {
        for dim in DIMS {
            let mut prev = f64::INFINITY;
            for k in 1..200 {
                let v = e_unchecked(dim, 0.05 * k as f64);
                assert!(v < prev);
                prev = v;
            }
        }
    }

    #[test]
    fn e_bounds_near_and_far() {
        for dim in DIMS {
            let n = dim.as_usize() as f64;
            for k in 1..100 {
                let r = 0.01 * k as f64;
                let bound = match dim {
                    Dimension::One => 0.5,
                    Dimension::Two => 1.0 + (1.0 / r).ln(),
                    Dimension::Three => r.powf(2.0 - n),
                };
                assert!(e_unchecked(dim, r) <= bound);
            }
            for k in 0..100 {
                let r = 1.0 + 0.3 * k as f64;
                assert!(e_unchecked(dim, r) <= (-r / 2.0).exp());
            }
        }
    }

    #[test]
    fn green_one_dimensional_value() {
        let x = HalfSpacePoint::on_axis(1.0);
        let y = HalfSpacePoint::on_axis(2.0);
        let g = green_g(Dimension::One, &x, &y).unwrap();
        let exact = ((-1.0f64).exp() - (-3.0f64).exp()) / 2.0;
        assert!((g - exact).abs() < 1e-15);
    }

    #[test]
    fn green_matches_naive_difference_when_well_separated() {
        let x = HalfSpacePoint::new([0.3, -0.2], 1.5);
        let y = HalfSpacePoint::new([0.1, 0.4], 0.7);
        for dim in DIMS {
            let g = green_g(dim, &x, &y).unwrap();
            let lat = match dim {
                Dimension::One => 0.0,
                Dimension::Two => (x.lateral[0] - y.lateral[0]).powi(2),
                Dimension::Three => x.lateral_distance_sq(&y),
            };
            let r = (lat + (x.height - y.height).powi(2)).sqrt();
            let rs = (lat + (x.height + y.height).powi(2)).sqrt();
            let naive = e_unchecked(dim, r) - e_unchecked(dim, rs);
            assert!(((g - naive) / naive).abs() < 1e-12);
        }
    }

    #[test]
    fn green_rejects_coincident_points() {
        let x = HalfSpacePoint::on_axis(1.0);
        assert!(matches!(green_g(Dimension::Three, &x, &x), Err(Error::Singularity(_))));
        let low = HalfSpacePoint::on_axis(0.0);
        assert!(green_g(Dimension::One, &low, &x).is_err());
    }

    #[test]
    fn poisson_closed_forms() {
        let x = HalfSpacePoint::on_axis(0.7);
        let p = poisson_p(Dimension::One, &x, [0.0; 2]).unwrap();
        assert!((p - 0.496_585_3).abs() < 1e-7);
        let x = HalfSpacePoint::new([0.4, 0.0], 0.6);
        let rho = (0.16f64 + 0.36).sqrt();
        let p3 = poisson_p(Dimension::Three, &x, [0.0; 2]).unwrap();
        let expect = 0.6 * (1.0 + rho) * (-rho).exp() / (2.0 * PI * rho.powi(3));
        assert!((p3 - expect).abs() < 1e-15);
    }

    #[test]
    fn poisson_is_normal_derivative_of_green() {
        // P(x,z) = d/ds G(x,(z,s)) at s = 0, by one-sided differences.
        let x = HalfSpacePoint::new([0.35, -0.1], 0.8);
        let z = [0.05, 0.2];
        for dim in DIMS {
            let lat = match dim {
                Dimension::One => [0.0; 2],
                Dimension::Two => [z[0], 0.0],
                Dimension::Three => z,
            };
            let g = |s: f64| green_g(dim, &x, &HalfSpacePoint::new(lat, s)).unwrap();
            let h = 1e-5;
            // G vanishes at s = 0; second-order one-sided derivative
            let fd = (4.0 * g(h) - g(2.0 * h)) / (2.0 * h);
            let p = poisson_p(dim, &x, lat).unwrap();
            assert!(((fd - p) / p).abs() < 1e-7, "N={} fd={fd} p={p}", dim.as_usize());
        }
    }
}
