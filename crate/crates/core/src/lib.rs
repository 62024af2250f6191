//! Positive solutions of `-Δu + u = u^p` on the half space `ℝ^N_+` with boundary data
//! `κμ`, for `N ∈ {1, 2, 3}`.
//!
//! Solutions are fixed points of `u = κP[μ] + G[u^p]`, with `G` and `P` the Green and
//! Poisson kernels of `-Δ + 1`. The crate provides
//!
//! - [`exponents`]: critical exponents and admissibility of `(q, α)`,
//! - [`kernels`]: `E`, `G` and `P` in closed form,
//! - [`discretization`] and [`operators`]: graded grids and the dense kernel matrix,
//! - [`solver`]: monotone iteration, Newton refinement and the threshold `κ*`,
//! - [`continuation`]: the solution branch through the fold,
//! - [`verify`]: empirical checks of kernel identities and integral bounds.
//!
//! The guide in `book/` walks through each of these with runnable examples.

pub mod continuation;
pub mod discretization;
pub mod error;
pub mod exponents;
pub mod kernels;
pub mod linalg;
pub mod operators;
pub mod solver;
pub mod special;
pub mod verify;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/exponents.md")]
    mod exponents {}
    #[doc = include_str!("../../../book/src/kernels.md")]
    mod kernels {}
    #[doc = include_str!("../../../book/src/discretization.md")]
    mod discretization {}
    #[doc = include_str!("../../../book/src/solving.md")]
    mod solving {}
    #[doc = include_str!("../../../book/src/continuation.md")]
    mod continuation {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
