//! Critical exponents, admissibility of `(q, α)` pairs, the Besov-region test for
//! boundary data, and the exponent-set recursion `D_j(r0, β0)` used to bootstrap
//! integrability of iteration differences.
//!
//! Everything here is closed-form algebra and works for every dimension `N ≥ 1`;
//! only the solver-level modules are restricted to `N ≤ 3`.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Relative slack used when classifying strict inequalities. A pair that sits on the
/// boundary up to this tolerance counts as a violation.
pub const STRICT_TOLERANCE: f64 = 1e-12;

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn integer_sqrt(n: i64) -> Option<i64> {
    if n < 0 {
        return None;
    }
    let r = (n as f64).sqrt().round() as i64;
    (r - 1..=r + 1).find(|&c| c >= 0 && c * c == n)
}

/// An exponent that is either `+∞` or an exact algebraic number of the form
/// `(a + b·√c) / d` with integer coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExactExponent {
    Infinite,
    /// `numerator / denominator`, reduced, denominator positive.
    Rational { numerator: i64, denominator: i64 },
    /// `(rational + coefficient·√radicand) / denominator`, reduced, radicand square-free part
    /// not extracted (only perfect squares are folded into the rational part).
    Surd {
        rational: i64,
        coefficient: i64,
        radicand: i64,
        denominator: i64,
    },
}

impl ExactExponent {
    pub fn rational(numerator: i64, denominator: i64) -> Self {
        assert!(denominator != 0, "zero denominator");
        let g = gcd(numerator, denominator).max(1);
        let sign = denominator.signum();
        ExactExponent::Rational {
            numerator: sign * numerator / g,
            denominator: sign * denominator / g,
        }
    }

    pub fn surd(rational: i64, coefficient: i64, radicand: i64, denominator: i64) -> Self {
        assert!(denominator != 0, "zero denominator");
        if coefficient == 0 || radicand == 0 {
            return Self::rational(rational, denominator);
        }
        if let Some(root) = integer_sqrt(radicand) {
            return Self::rational(rational + coefficient * root, denominator);
        }
        let g = gcd(gcd(rational, coefficient), denominator).max(1);
        let sign = denominator.signum();
        ExactExponent::Surd {
            rational: sign * rational / g,
            coefficient: sign * coefficient / g,
            radicand,
            denominator: sign * denominator / g,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExactExponent::Infinite)
    }

    /// Floating-point value; `f64::INFINITY` for the infinite branch.
    pub fn value(&self) -> f64 {
        match *self {
            ExactExponent::Infinite => f64::INFINITY,
            ExactExponent::Rational {
                numerator,
                denominator,
            } => numerator as f64 / denominator as f64,
            ExactExponent::Surd {
                rational,
                coefficient,
                radicand,
                denominator,
            } => (rational as f64 + coefficient as f64 * (radicand as f64).sqrt()) / denominator as f64,
        }
    }
}

impl fmt::Display for ExactExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ExactExponent::Infinite => write!(f, "∞"),
            ExactExponent::Rational {
                numerator,
                denominator: 1,
            } => write!(f, "{numerator}"),
            ExactExponent::Rational {
                numerator,
                denominator,
            } => write!(f, "{numerator}/{denominator}"),
            ExactExponent::Surd {
                rational,
                coefficient,
                radicand,
                denominator,
            } => {
                let sign = if coefficient < 0 { '-' } else { '+' };
                let c = coefficient.abs();
                let surd = if c == 1 {
                    format!("√{radicand}")
                } else {
                    format!("{c}√{radicand}")
                };
                if denominator == 1 {
                    write!(f, "{rational}{sign}{surd}")
                } else {
                    write!(f, "({rational}{sign}{surd})/{denominator}")
                }
            }
        }
    }
}

/// Sobolev and Joseph–Lundgren exponents of one dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalExponents {
    pub dimension: usize,
    pub sobolev: ExactExponent,
    pub joseph_lundgren: ExactExponent,
}

/// `p_S = (N+2)/(N-2)` for `N ≥ 3` and `p_JL = (N²-8N+4+8√(N-1)) / ((N-2)(N-10))` for
/// `N ≥ 11`; both are infinite below those dimensions.
pub fn critical_exponents(n: usize) -> CriticalExponents {
    let ni = n as i64;
    let sobolev = if n <= 2 {
        ExactExponent::Infinite
    } else {
        ExactExponent::rational(ni + 2, ni - 2)
    };
    let joseph_lundgren = if n <= 10 {
        ExactExponent::Infinite
    } else {
        ExactExponent::surd(ni * ni - 8 * ni + 4, 8, ni - 1, (ni - 2) * (ni - 10))
    };
    CriticalExponents {
        dimension: n,
        sobolev,
        joseph_lundgren,
    }
}

/// `lhs < rhs` with boundary cases (up to [`STRICT_TOLERANCE`] relative) counted as false.
pub fn strictly_less(lhs: f64, rhs: f64) -> bool {
    let scale = lhs.abs().max(rhs.abs()).max(1.0);
    lhs < rhs - STRICT_TOLERANCE * scale
}

/// `lhs ≤ rhs` with the same relative slack in the permissive direction.
pub fn less_or_close(lhs: f64, rhs: f64) -> bool {
    let scale = lhs.abs().max(rhs.abs()).max(1.0);
    lhs <= rhs + STRICT_TOLERANCE * scale
}

/// One of the hypotheses on `(q, α)` required for existence of minimal solutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum AdmissibilityCondition {
    /// `q > p`
    IntegrabilityAbovePower,
    /// `1/q + α < 2/p`
    BoundaryWeight,
    /// `N/q + α < 2/(p-1)`
    ScalingSubcritical,
    /// `α ≥ 0`
    NonnegativeWeight,
}

impl AdmissibilityCondition {
    pub fn describe(&self) -> &'static str {
        match self {
            Self::IntegrabilityAbovePower => "q > p",
            Self::BoundaryWeight => "1/q + alpha < 2/p",
            Self::ScalingSubcritical => "N/q + alpha < 2/(p-1)",
            Self::NonnegativeWeight => "alpha >= 0",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissiblePair {
    pub q: f64,
    pub alpha: f64,
    pub valid: bool,
    pub violated_conditions: Vec<AdmissibilityCondition>,
}

pub fn check_admissible(n: usize, p: f64, q: f64, alpha: f64) -> AdmissiblePair {
    use AdmissibilityCondition::*;
    let nf = n as f64;
    let mut violated = Vec::new();
    if !strictly_less(p, q) {
        violated.push(IntegrabilityAbovePower);
    }
    if !strictly_less(1.0 / q + alpha, 2.0 / p) {
        violated.push(BoundaryWeight);
    }
    if !strictly_less(nf / q + alpha, 2.0 / (p - 1.0)) {
        violated.push(ScalingSubcritical);
    }
    if alpha < 0.0 {
        violated.push(NonnegativeWeight);
    }
    AdmissiblePair {
        q,
        alpha,
        valid: violated.is_empty(),
        violated_conditions: violated,
    }
}

/// Region test for boundary data `μ ∈ B^{-s}_{q,q}(ℝ^{N-1})`:
/// `q > max{p, N(p-1)/2}` and `s < min{2/p, 2/(p-1) - (N-1)/q}`.
pub fn check_besov_region(n: usize, p: f64, q: f64, s: f64) -> Result<bool> {
    if n < 2 {
        return Err(Error::Domain(
            "the boundary of the half line is a point; the Besov condition is vacuous for N = 1".into(),
        ));
    }
    let nf = n as f64;
    let q_floor = p.max(nf * (p - 1.0) / 2.0);
    let s_ceiling = (2.0 / p).min(2.0 / (p - 1.0) - (nf - 1.0) / q);
    Ok(strictly_less(q_floor, q) && strictly_less(s, s_ceiling))
}

/// Exponent window `ν ≥ 1`, `ν²/(2ν-1) < p` under which the uniform energy bound on
/// powers of `w^κ` holds. Formula check only.
pub fn energy_exponent_window(p: f64, nu: f64) -> bool {
    nu >= 1.0 && strictly_less(nu * nu / (2.0 * nu - 1.0), p)
}

fn require_admissible(n: usize, p: f64, q: f64, alpha: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    if p <= 1.0 {
        return Err(Error::Precondition(format!("p = {p} must exceed 1")));
    }
    let pair = check_admissible(n, p, q, alpha);
    if pair.valid {
        Ok(())
    } else {
        let list: Vec<_> = pair.violated_conditions.iter().map(|c| c.describe()).collect();
        Err(Error::Precondition(format!(
            "(q, alpha) = ({q}, {alpha}) is not admissible: violates {}",
            list.join(", ")
        )))
    }
}

/// Gap `Δ = 2 - (p-1)(N/q + α)`, positive for admissible pairs.
pub fn scaling_gap(n: usize, p: f64, q: f64, alpha: f64) -> f64 {
    2.0 - (p - 1.0) * (n as f64 / q + alpha)
}

/// Step `τ` by which the lower end of the `1/r` window recedes per recursion level.
pub fn tau(n: usize, p: f64, q: f64, alpha: f64) -> Result<f64> {
    require_admissible(n, p, q, alpha)?;
    let nf = n as f64;
    let t = if n == 1 {
        2.0 - (p - 1.0) / q
    } else {
        (2.0 / nf - (p - 1.0) / q).min(scaling_gap(n, p, q, alpha) / (nf - 1.0))
    };
    debug_assert!(t > 0.0);
    Ok(t)
}

/// Parameters of the recursion `D_j(r0, β0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DSetParams {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub r0: f64,
    pub beta0: f64,
    pub tau: f64,
    pub delta: f64,
}

impl DSetParams {
    /// Validates admissibility of `(q, α)` and the starting condition
    /// `1/r0 < 1 - (p-1)/q`, `1/r0 + β0 < 2 - (p-1)(1/q + α)`.
    pub fn new(n: usize, p: f64, q: f64, alpha: f64, r0: f64, beta0: f64) -> Result<Self> {
        let tau = tau(n, p, q, alpha)?;
        if r0 <= 1.0 {
            return Err(Error::Precondition(format!("r0 = {r0} must exceed 1")));
        }
        if !strictly_less(1.0 / r0, 1.0 - (p - 1.0) / q) {
            return Err(Error::Precondition("1/r0 < 1 - (p-1)/q fails".into()));
        }
        if !strictly_less(1.0 / r0 + beta0, 2.0 - (p - 1.0) * (1.0 / q + alpha)) {
            return Err(Error::Precondition("1/r0 + beta0 < 2 - (p-1)(1/q + alpha) fails".into()));
        }
        Ok(DSetParams {
            n,
            p,
            q,
            alpha,
            r0,
            beta0,
            tau,
            delta: scaling_gap(n, p, q, alpha),
        })
    }

    /// `β_j(r) = max{β0 + N(1/r0 - 1/r) - jΔ, -1 - 1/r}`.
    pub fn beta_j(&self, j: usize, r: f64) -> f64 {
        let shifted = self.beta0 + self.n as f64 * (1.0 / self.r0 - 1.0 / r) - j as f64 * self.delta;
        shifted.max(-1.0 - 1.0 / r)
    }

    /// Membership of `(r, β)` in `D_j(r0, β0)`.
    pub fn d_membership(&self, j: usize, r: f64, beta: f64) -> bool {
        if r <= 1.0 {
            return false;
        }
        if j == 0 {
            return r == self.r0 && beta == self.beta0;
        }
        let inv = 1.0 / r;
        let jf = j as f64;
        let lower = 1.0 / self.r0 - jf * self.tau;
        let upper = 1.0 / self.r0 + jf * (self.p - 1.0) / self.q;
        lower < inv && inv < upper && beta > self.beta_j(j, r)
    }

    /// The three closed conditions characterizing `D_j = D_*`:
    /// the `1/r` window covers `(0, 1)` and the first branch of `β_j` never binds.
    pub fn is_stabilized(&self, j: usize) -> bool {
        if j == 0 {
            return false;
        }
        let jf = j as f64;
        let inv0 = 1.0 / self.r0;
        let covers_small = less_or_close(inv0 - jf * self.tau, 0.0);
        let covers_large = less_or_close(1.0, inv0 + jf * (self.p - 1.0) / self.q);
        // inf over r > 1 of (N-1)/r is 0 for every N.
        let floor_binds = less_or_close(self.beta0 + self.n as f64 * inv0 + 1.0 - jf * self.delta, 0.0);
        covers_small && covers_large && floor_binds
    }

    /// Smallest `j` with `D_j(r0, β0) = D_* = {(r, β): r > 1, 1/r + β > -1}`.
    pub fn stabilization_index(&self) -> usize {
        let inv0 = 1.0 / self.r0;
        let estimate = [
            inv0 / self.tau,
            (1.0 - inv0) * self.q / (self.p - 1.0),
            (self.beta0 + self.n as f64 * inv0 + 1.0) / self.delta,
        ]
        .into_iter()
        .fold(1.0_f64, f64::max)
        .ceil() as usize;
        // The estimate can be off by one through rounding on either side.
        let start = estimate.saturating_sub(1).max(1);
        (start..)
            .find(|&j| self.is_stabilized(j))
            .expect("the conditions are monotone in j and eventually hold")
    }
}

/// Membership in the limiting set `D_*`.
pub fn in_limit_set(r: f64, beta: f64) -> bool {
    r > 1.0 && 1.0 / r + beta > -1.0
}

/// Hypotheses under which `G` maps `L^q_α` boundedly into `L^r_β`.
pub fn integral_inequality_holds(n: usize, q: f64, alpha: f64, r: f64, beta: f64) -> bool {
    let nf = n as f64;
    strictly_less(1.0, q)
        && less_or_close(q, r)
        && r.is_finite()
        && strictly_less(1.0 / q + alpha, 2.0)
        && strictly_less(-1.0, 1.0 / r + beta)
        && strictly_less(1.0 / q - 1.0 / r, 2.0 / nf)
        && less_or_close(nf / q + alpha - 2.0, nf / r + beta)
}

/// Range of `(s, θ)` for the local integral bound of `G(x, ·) h^θ` in `L^s`:
/// `1 ≤ s < N/(N-2)` (no upper limit for `N ≤ 2`) and `-1 - 1/s < θ < N - 1 - N/s`.
pub fn gintest_admissible(n: usize, s: f64, theta: f64) -> bool {
    let nf = n as f64;
    let s_ok = less_or_close(1.0, s) && (n <= 2 || strictly_less(s, nf / (nf - 2.0)));
    s_ok && strictly_less(-1.0 - 1.0 / s, theta) && strictly_less(theta, nf - 1.0 - nf / s)
}

/// Exponent of `h(x_N)` in the local integral bound.
pub fn gintest_exponent(n: usize, s: f64, theta: f64) -> f64 {
    2.0 + theta - n as f64 * (1.0 - 1.0 / s)
}
