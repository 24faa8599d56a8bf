//! Interior transmission eigenvalues and eigenfunctions on corner domains.
//!
//! The crate discretizes the interior transmission problem with continuous
//! P1 finite elements, solves the resulting real nonsymmetric pencil with a
//! shift-invert Krylov–Schur iteration, and measures how the eigenfunctions
//! vanish or blow up near corners, edges and vertices of the domain.
//!
//! Layout:
//!
//! * [`geometry`] – built-in domains, meshing, refinement, DOF partition
//! * [`expr`] / [`problem`] – refractive-index expressions and problem data
//! * [`sparse`], [`assembly`] – sparse storage and the FEM pencil
//! * [`lu`], [`krylov`], [`solver`] – factorization and eigen solver
//! * [`bessel`], [`radial`] – semi-analytic disk/ball eigenvalues
//! * [`analysis`] – averaged L² metrics, rate fitting, spectrum checks
//! * [`config`], [`io`], [`runner`] – experiment configuration and artifacts

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod assembly;
pub mod bessel;
pub mod config;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod io;
pub mod krylov;
pub mod lu;
pub mod problem;
pub mod radial;
pub mod runner;
pub mod solver;
pub mod sparse;

pub use error::{Error, Result};

/// Complex scalar used by the eigen solver.
pub type C64 = nalgebra::Complex<f64>;
