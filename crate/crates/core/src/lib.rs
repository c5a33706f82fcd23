//! Maximizers of the fractional torsion energy over a rearrangement class.
//!
//! For a bounded one-dimensional domain `D`, an exponent `0 < s < 1` and a
//! mass `β`, the crate approximates
//!
//! ```text
//! max { ∫ f u_f : 0 ≤ f ≤ 1, ∫ f = β },   (-Δ)^s u_f = f in D,  u_f = 0 outside D,
//! ```
//!
//! on a uniform lattice. The pipeline runs through [`grid`] (domains, cells,
//! mass snapping), [`operator`] (the dense M-matrix of the integral fractional
//! Laplacian), [`solver`] (Cholesky and conjugate gradients), [`rearrangement`]
//! (densities and the top-`k` linear oracle) and [`maximizer`] (alternating
//! ascent, verification, exhaustive search). [`validation`] bundles the
//! invariant checks used by the `fracmax validate` command.
//!
//! ```
//! use fracmax::grid::{snap_mass, Grid};
//! use fracmax::maximizer::{ascend, AscentOptions};
//! use fracmax::operator::Operator;
//!
//! let grid = Grid::build(&[(0.0, 1.0)], 0.05)?;
//! let op = Operator::assemble(&grid, 0.3)?;
//! let k = snap_mass(&grid, 0.25)?.k;
//! let best = ascend(&op, k, &AscentOptions::default())?;
//! assert!(best.verification.passed());
//! # Ok::<(), fracmax::Error>(())
//! ```
//!
//! The guide in `book/` walks through each stage; its code blocks run as
//! doctests of this crate.

pub mod error;
pub mod grid;
pub mod io;
pub mod maximizer;
pub mod operator;
pub mod rearrangement;
pub mod solver;
pub mod validation;

pub use error::{Error, Result};

// Book chapters, compiled and run by `cargo test --doc`.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/domains.md")]
    mod domains {}
    #[doc = include_str!("../../../book/src/operator.md")]
    mod operator {}
    #[doc = include_str!("../../../book/src/solvers.md")]
    mod solvers {}
    #[doc = include_str!("../../../book/src/rearrangement.md")]
    mod rearrangement {}
    #[doc = include_str!("../../../book/src/ascent.md")]
    mod ascent {}
    #[doc = include_str!("../../../book/src/two_components.md")]
    mod two_components {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
