//! Numerical laboratory for nodal sets of Laplace eigenfunctions on flat
//! model geometries (tori and Dirichlet boxes).
//!
//! The crate builds exact eigenfunctions with closed-form values and
//! gradients, extracts their zero sets as codimension-one meshes, measures
//! growth and sign-volume statistics over wavelength balls, checks L^p norm
//! inequalities and the integral identity tying the L^1 mass of an
//! eigenfunction to the gradient flux through its nodal set, and fits power
//! laws across eigenvalue sweeps.
//!
//! Everything is deterministic: random ensembles are seeded with a
//! documented generator and all floating-point reductions run over a fixed
//! binary tree, so repeated runs (parallel or sequential) emit identical
//! bytes.

pub mod error;
pub mod exponents;
pub mod fd;
pub mod fit;
pub mod geometry;
pub mod growth;
pub mod harmonic;
mod mc_table;
pub mod modes;
pub mod nodal;
pub mod norms;
pub mod parallel;
pub mod report;
pub mod rng;
pub mod sweep;

pub use error::{Error, Result};
